#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hones/driver.hpp"
#include "hones/flows.hpp"
#include "hones/stats.hpp"

namespace hones::cli {

inline constexpr int kCsvSchemaVersion = 1;
inline constexpr int kSummarySchemaVersion = 1;

enum class SolverKind { hones, pg_warm, oracle };

SolverKind parse_solver(const std::string& name);
std::string solver_name(SolverKind kind);

struct RunOptions {
  FlowConfig flow;
  SolverKind solver = SolverKind::hones;
  /// Second solver fed the same (g, c) stream; its x is compared per step.
  std::optional<SolverKind> twin;
  Index epoch = 250;
  SolverConfig session;
  /// 0 means 10 n.
  Index cycle_cap = 0;
  int threads = 0;
  std::filesystem::path out_dir = "out";
};

struct RunResult {
  std::vector<StepReport> reports;
  SequenceSummary summary;
  /// Per-step max |x - x_twin|; empty without a twin.
  std::vector<double> x_deviation;
};

/// Runs one scenario in memory.
RunResult run_scenario(const RunOptions& options);

void write_steps_csv(std::ostream& out, const std::vector<StepReport>& reports);
void write_agreement_csv(std::ostream& out, const std::vector<double>& deviation);
std::string summary_json(const RunOptions& options, const RunResult& result);

/// Runs and writes steps.csv, summary.json and (with a twin) x_agreement.csv.
void run_and_write(const RunOptions& options);

/// Scenario grid: a JSON array of objects overriding fields of `base`
/// (kind, n, steps, epsilon, c_factor, seed, lambda, prices, solver, twin).
/// Scenario k writes to <out_dir>/scenario_<k>. Returns scenarios that failed.
int run_grid(const RunOptions& base, const std::string& grid_json, int jobs, std::ostream& log);

struct VerifyOptions {
  std::vector<std::uint64_t> seeds;
  /// Empty cycles through {5, 10, 30}.
  std::optional<Index> n;
  Index steps = 30;
  bool exhaustive = false;
  std::string inject_fault;
};

/// Property suite; prints a table and returns the process exit code.
int run_verify(const VerifyOptions& options, std::ostream& out);

}  // namespace hones::cli
