#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "hones/baselines.hpp"
#include "json.hpp"

namespace hones::cli {

using nlohmann::json;

SolverKind parse_solver(const std::string& name) {
  if (name == "hones") return SolverKind::hones;
  if (name == "pg-warm") return SolverKind::pg_warm;
  if (name == "oracle") return SolverKind::oracle;
  throw std::invalid_argument("unknown solver '" + name + "' (expected hones, pg-warm or oracle)");
}

std::string solver_name(SolverKind kind) {
  switch (kind) {
    case SolverKind::hones: return "hones";
    case SolverKind::pg_warm: return "pg-warm";
    case SolverKind::oracle: return "oracle";
  }
  return "?";
}

namespace {

std::unique_ptr<SequentialSolver> make_solver(SolverKind kind, const Flow& flow, const RunOptions& o) {
  SolverConfig cfg = o.session;
  cfg.cycle_cap = o.cycle_cap;
  cfg.policy.threads = o.threads;
  switch (kind) {
    case SolverKind::hones:
      return std::make_unique<SolverSession>(flow.initial_matrix(), flow.initial_c(), cfg);
    case SolverKind::pg_warm: {
      PgOptions pg;
      pg.tol = cfg.tol;
      return std::make_unique<PgWarmSolver>(flow.initial_matrix(), flow.initial_c(), pg, cfg.policy);
    }
    case SolverKind::oracle:
      return std::make_unique<OracleSolver>(flow.initial_matrix(), flow.initial_c(), cfg.oracle);
  }
  throw std::logic_error("solver kind");
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

RunResult run_scenario(const RunOptions& options) {
  options.flow.validate();
  std::unique_ptr<Flow> flow = make_flow(options.flow);
  Index steps = options.flow.steps;
  if (flow->length() >= 0) steps = std::min(steps, flow->length());

  std::unique_ptr<SequentialSolver> primary = make_solver(options.solver, *flow, options);
  std::unique_ptr<SequentialSolver> twin;
  if (options.twin) twin = make_solver(*options.twin, *flow, options);

  RunResult result;
  result.reports.reserve(static_cast<std::size_t>(steps));
  Vec x = primary->x();
  for (Index t = 0; t < steps; ++t) {
    const FlowStep s = flow->next(x);
    result.reports.push_back(primary->step(s.g, s.c));
    x = primary->x();
    if (twin) {
      twin->step(s.g, s.c);
      result.x_deviation.push_back((x - twin->x()).cwiseAbs().maxCoeff());
    }
  }
  result.summary = summarize(result.reports, options.epoch);
  return result;
}

void write_steps_csv(std::ostream& out, const std::vector<StepReport>& reports) {
  out << "t,k_A,k_c,k_t,e_t,support_change,support_size,s_max,s_star,kkt_residual,"
         "mult_count,mult_bound,maintenance_mults,rebuilds,iterations,wall_ns,a_update_ns\n";
  for (const StepReport& r : reports) {
    out << r.t << ',' << r.k_a << ',' << r.k_c << ',' << r.k_t << ',' << r.e_t << ','
        << r.support_change << ',' << r.support_size << ',' << r.s_max << ',' << r.s_star << ','
        << fmt_double(r.kkt_residual) << ',' << r.mult_count << ',' << r.mult_bound << ',' << r.maintenance_mults << ','
        << r.rebuilds << ',' << r.iterations << ',' << r.wall_ns << ',' << r.a_update_ns << '\n';
  }
}

void write_agreement_csv(std::ostream& out, const std::vector<double>& deviation) {
  out << "t,max_abs_dev\n";
  for (std::size_t k = 0; k < deviation.size(); ++k) out << k + 1 << ',' << fmt_double(deviation[k]) << '\n';
}

std::string summary_json(const RunOptions& options, const RunResult& result) {
  const SequenceSummary& s = result.summary;
  json j;
  j["schema_version"] = kSummarySchemaVersion;
  j["flow"] = json::parse(flow_config_to_json(options.flow));
  j["solver"] = solver_name(options.solver);
  j["twin"] = options.twin ? json(solver_name(*options.twin)) : json(nullptr);
  j["steps"] = s.steps;
  j["epoch"] = s.epoch;
  j["support"] = {{"mean", s.support_mean}, {"std", s.support_std},
                  {"min", s.support_min}, {"max", s.support_max}};
  j["mean_k_t"] = s.mean_k_t;
  j["e_t"] = {{"zero_fraction", s.e_zero_fraction}, {"q99", s.e_q99},
              {"q999", s.e_q999}, {"max", s.e_max}};
  j["max_kkt_residual"] = s.max_kkt_residual;
  j["rebuilds"] = s.total_rebuilds;
  j["mult_count"] = s.total_mults;
  j["maintenance_mults"] = s.total_maintenance_mults;
  j["polished_steps"] = s.polished_steps;
  j["bound_violations"] = s.bound_violations;
  j["lower_bound_violations"] = s.lower_bound_violations;
  j["wall_ns"] = {{"path", s.total_wall_ns},
                  {"a_update", s.total_a_update_ns},
                  {"total", s.total_wall_ns + s.total_a_update_ns},
                  {"epoch_cumulative", s.epoch_cumulative_wall_ns}};
  if (!result.x_deviation.empty())
    j["max_x_deviation"] = *std::max_element(result.x_deviation.begin(), result.x_deviation.end());
  return j.dump(2);
}

void run_and_write(const RunOptions& options) {
  const RunResult result = run_scenario(options);
  std::filesystem::create_directories(options.out_dir);
  auto open = [&](const char* name) {
    std::ofstream f(options.out_dir / name);
    if (!f) throw std::runtime_error("cannot write " + (options.out_dir / name).string());
    return f;
  };
  {
    std::ofstream f = open("steps.csv");
    write_steps_csv(f, result.reports);
  }
  {
    std::ofstream f = open("summary.json");
    f << summary_json(options, result) << '\n';
  }
  if (options.twin) {
    std::ofstream f = open("x_agreement.csv");
    write_agreement_csv(f, result.x_deviation);
  }
}

namespace {

RunOptions scenario_options(const RunOptions& base, const json& item, std::size_t index) {
  if (!item.is_object()) throw std::invalid_argument("grid entry " + std::to_string(index) + " is not an object");
  RunOptions o = base;
  json flow = json::parse(flow_config_to_json(base.flow));
  for (const char* key : {"kind", "n", "steps", "epsilon", "c_factor", "seed", "lambda", "prices"})
    if (item.contains(key)) flow[key] = item[key];
  o.flow = flow_config_from_json(flow.dump());
  if (item.contains("solver")) o.solver = parse_solver(item["solver"].get<std::string>());
  if (item.contains("twin")) o.twin = parse_solver(item["twin"].get<std::string>());
  o.out_dir = base.out_dir / ("scenario_" + std::to_string(index));
  return o;
}

}  // namespace

int run_grid(const RunOptions& base, const std::string& grid_json, int jobs, std::ostream& log) {
  const json grid = json::parse(grid_json);
  if (!grid.is_array()) throw std::invalid_argument("grid must be a JSON array");
  std::vector<RunOptions> scenarios;
  for (std::size_t k = 0; k < grid.size(); ++k) scenarios.push_back(scenario_options(base, grid[k], k));

  std::vector<RunResult> results(scenarios.size());
  std::vector<std::string> errors(scenarios.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < scenarios.size(); k = next++) {
      try {
        results[k] = run_scenario(scenarios[k]);
      } catch (const std::exception& e) {
        errors[k] = e.what();
      }
    }
  };
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(scenarios.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  // Output and aggregation on this thread only.
  std::filesystem::create_directories(base.out_dir);
  std::ofstream agg(base.out_dir / "grid_summary.csv");
  agg << "scenario,kind,n,c_factor,seed,solver,steps,support_mean,e_zero_fraction,"
         "max_kkt_residual,wall_ns,a_update_ns,status\n";
  int failed = 0;
  for (std::size_t k = 0; k < scenarios.size(); ++k) {
    const RunOptions& o = scenarios[k];
    const SequenceSummary& s = results[k].summary;
    const bool ok = errors[k].empty();
    if (ok) {
      std::filesystem::create_directories(o.out_dir);
      std::ofstream steps(o.out_dir / "steps.csv");
      write_steps_csv(steps, results[k].reports);
      std::ofstream summary(o.out_dir / "summary.json");
      summary << summary_json(o, results[k]) << '\n';
      if (o.twin) {
        std::ofstream agree(o.out_dir / "x_agreement.csv");
        write_agreement_csv(agree, results[k].x_deviation);
      }
    } else {
      ++failed;
      log << "scenario " << k << ": " << errors[k] << '\n';
    }
    agg << k << ',' << flow_kind_name(o.flow.kind) << ',' << o.flow.n << ',' << fmt_double(o.flow.c_factor)
        << ',' << o.flow.seed << ',' << solver_name(o.solver) << ',' << s.steps << ','
        << fmt_double(s.support_mean) << ',' << fmt_double(s.e_zero_fraction) << ','
        << fmt_double(s.max_kkt_residual) << ',' << s.total_wall_ns << ',' << s.total_a_update_ns << ','
        << (ok ? "ok" : "error") << '\n';
  }
  return failed;
}

}  // namespace hones::cli
