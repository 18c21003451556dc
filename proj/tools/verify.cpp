#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>

#include "commands.hpp"

namespace hones::cli {

namespace {

struct Tally {
  Index checks = 0;
  Index failures = 0;
  double worst = 0.0;
  std::string first_failure;
};

constexpr const char* kInvariants[] = {"oracle-equivalence", "kkt-residual", "turning-point-bound",
                                       "state-consistency", "solver-error"};

class Suite {
 public:
  void record(const std::string& name, double value, bool ok, const std::string& where) {
    Tally& t = tallies_[name];
    ++t.checks;
    t.worst = std::max(t.worst, value);
    if (!ok) {
      if (t.failures == 0) t.first_failure = where;
      ++t.failures;
    }
  }

  bool passed() const {
    return std::all_of(tallies_.begin(), tallies_.end(), [](const auto& kv) { return kv.second.failures == 0; });
  }

  void print(std::ostream& out) const {
    char line[160];
    std::snprintf(line, sizeof(line), "%-22s %8s %8s %12s  %s\n", "invariant", "checks", "failed", "worst", "status");
    out << line;
    for (const char* name : kInvariants) {
      const auto it = tallies_.find(name);
      const Tally t = it == tallies_.end() ? Tally{} : it->second;
      std::snprintf(line, sizeof(line), "%-22s %8ld %8ld %12.3e  %s\n", name, static_cast<long>(t.checks),
                    static_cast<long>(t.failures), t.worst, t.failures == 0 ? "PASS" : "FAIL");
      out << line;
    }
    for (const char* name : kInvariants) {
      const auto it = tallies_.find(name);
      if (it != tallies_.end() && it->second.failures > 0)
        out << "FAIL " << name << " first at " << it->second.first_failure << '\n';
    }
  }

 private:
  std::map<std::string, Tally> tallies_;
};

constexpr FlowKind kKinds[] = {FlowKind::synthetic, FlowKind::ons, FlowKind::markowitz};
constexpr Index kSizes[] = {5, 10, 30};

void corrupt_m(SolverSession& session) {
  Par1& p = session.mutable_par1();
  const Index j = session.quadruple().support[0];
  p.m.col(j)[j] += 1e-3 * (1.0 + std::abs(p.m.col(j)[j]));
}

void verify_run(std::uint64_t seed, const VerifyOptions& options, Suite& suite) {
  FlowConfig fc;
  fc.seed = seed;
  fc.n = options.n ? *options.n : kSizes[seed % 3];
  fc.kind = kKinds[(seed / 3) % 3];
  fc.steps = options.steps;
  const std::string tag = std::string(flow_kind_name(fc.kind)) + " n=" + std::to_string(fc.n) +
                          " seed=" + std::to_string(seed);

  std::unique_ptr<Flow> flow = make_flow(fc);
  Mat a = flow->initial_matrix();
  OracleOptions oracle;
  oracle.force_exhaustive = options.exhaustive;
  SolverConfig cfg;
  cfg.oracle = oracle;
  try {
    SolverSession session(a, flow->initial_c(), cfg);
    Index t = 0;
    session.set_event_observer([&](const SolverSession& s, const PathEvent& e) {
      const double dev = s.validate();
      const double cap = 1e-8 * std::max(1.0, s.kappa());
      suite.record("state-consistency", dev, dev <= cap,
                   tag + " t=" + std::to_string(t) + " event index " + std::to_string(e.index));
    });
    if (options.inject_fault == "m-corruption") corrupt_m(session);

    Vec x = session.x();
    const Index steps = flow->length() >= 0 ? std::min(fc.steps, flow->length()) : fc.steps;
    for (t = 1; t <= steps; ++t) {
      const std::string where = tag + " t=" + std::to_string(t);
      const double before = session.validate();
      suite.record("state-consistency", before, before <= 1e-8 * std::max(1.0, session.kappa()), where);

      const FlowStep s = flow->next(x);
      const StepReport r = session.step(s.g, s.c);
      x = session.x();
      a.noalias() += s.g * s.g.transpose();

      const Problem problem(a, s.c, Problem::Check::none);
      const Quadruple ref = options.exhaustive ? enumerate_solve(problem) : oracle_solve(problem);
      const double dev = (ref.x() - x).cwiseAbs().maxCoeff();
      suite.record("oracle-equivalence", dev, dev <= 1e-7, where);
      const double res = kkt_residual(problem, session.quadruple());
      suite.record("kkt-residual", res, res <= 1e-8, where);
      suite.record("turning-point-bound", static_cast<double>(r.support_change - r.k_t),
                   r.k_t >= r.support_change, where);
    }
  } catch (const std::exception& e) {
    suite.record("solver-error", 1.0, false, tag + ": " + e.what());
  }
}

}  // namespace

int run_verify(const VerifyOptions& options, std::ostream& out) {
  if (!options.inject_fault.empty() && options.inject_fault != "m-corruption")
    throw std::invalid_argument("unknown fault '" + options.inject_fault + "' (expected m-corruption)");
  if (options.exhaustive && options.n && *options.n > 20)
    throw std::invalid_argument("--exhaustive needs n <= 20");
  if (options.exhaustive && !options.n) throw std::invalid_argument("--exhaustive needs --n");
  Suite suite;
  for (std::uint64_t seed : options.seeds) verify_run(seed, options, suite);
  out << "verify: " << options.seeds.size() << " runs, " << options.steps << " steps each"
      << (options.exhaustive ? ", exhaustive oracle" : "") << '\n';
  suite.print(out);
  return suite.passed() ? 0 : 1;
}

}  // namespace hones::cli
