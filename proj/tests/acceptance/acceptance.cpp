// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails. `--only 3,5` runs a subset.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hones/baselines.hpp"
#include "hones/driver.hpp"
#include "hones/flows.hpp"
#include "hones/path_matrix.hpp"
#include "hones/stats.hpp"

using namespace hones;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

FlowConfig synthetic(Index n, double c_factor, std::uint64_t seed, Index steps) {
  FlowConfig fc;
  fc.kind = FlowKind::synthetic;
  fc.n = n;
  fc.c_factor = c_factor;
  fc.seed = seed;
  fc.steps = steps;
  return fc;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// Criteria 1 and 2 share their runs.
struct OracleRuns {
  double worst_x = 0.0;
  double worst_residual = 0.0;
  Index steps = 0;
  Index lower_bound_violations = 0;
  Index errors = 0;
  std::string first_failure;
};

OracleRuns oracle_runs() {
  OracleRuns out;
  const Index sizes[3] = {5, 10, 30};
  const FlowKind kinds[3] = {FlowKind::synthetic, FlowKind::ons, FlowKind::markowitz};
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    FlowConfig fc;
    fc.kind = kinds[(seed / 3) % 3];
    fc.n = sizes[seed % 3];
    fc.steps = 50;
    fc.seed = seed;
    try {
      auto flow = make_flow(fc);
      Mat a = flow->initial_matrix();
      SolverSession session(a, flow->initial_c());
      Vec x = session.x();
      for (Index t = 1; t <= fc.steps; ++t) {
        const FlowStep st = flow->next(x);
        const StepReport r = session.step(st.g, st.c);
        x = session.x();
        a.noalias() += st.g * st.g.transpose();
        const Problem p(a, st.c, Problem::Check::none);
        const Quadruple ref = oracle_solve(p);
        const double dx = (x - ref.x()).cwiseAbs().maxCoeff();
        const double res = kkt_residual(p, session.quadruple());
        out.worst_x = std::max(out.worst_x, dx);
        out.worst_residual = std::max(out.worst_residual, res);
        if (r.k_t < r.support_change) ++out.lower_bound_violations;
        if (out.first_failure.empty() && (!(dx <= 1e-7) || !(res <= 1e-8)))
          out.first_failure = "seed " + std::to_string(seed) + " t " + std::to_string(t);
        ++out.steps;
      }
    } catch (const std::exception& e) {
      ++out.errors;
      if (out.first_failure.empty()) out.first_failure = "seed " + std::to_string(seed) + ": " + e.what();
    }
  }
  return out;
}

const OracleRuns& cached_oracle_runs() {
  static const OracleRuns runs = oracle_runs();
  return runs;
}

Outcome criterion_oracle() {
  const OracleRuns& r = cached_oracle_runs();
  Outcome o;
  o.pass = r.errors == 0 && r.worst_x <= 1e-7 && r.worst_residual <= 1e-8;
  o.detail = fmt("1000 runs, %.0f steps, max |x - x_oracle| = %.2e (<= 1e-7), max KKT residual = %.2e (<= 1e-8)",
                 static_cast<double>(r.steps), r.worst_x, r.worst_residual);
  if (r.errors > 0) o.detail += ", " + std::to_string(r.errors) + " runs threw";
  if (!o.pass) o.detail += ", first failure " + r.first_failure;
  return o;
}

Outcome criterion_lower_bound() {
  const OracleRuns& r = cached_oracle_runs();
  Outcome o;
  o.pass = r.errors == 0 && r.lower_bound_violations == 0;
  o.detail = fmt("%.0f of %.0f steps with k_t < |S_t delta S_t-1|", static_cast<double>(r.lower_bound_violations),
                 static_cast<double>(r.steps));
  return o;
}

// Criteria 3 and 5 share their runs.
struct SparseRuns {
  std::vector<double> zero_fraction;
  std::vector<double> support_mean;
  Index bound_violations = 0;
  Index polished_steps = 0;
  Index steps = 0;
};

SparseRuns sparse_runs(double c_factor) {
  SparseRuns out;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto flow = make_flow(synthetic(100, c_factor, seed, 1000));
    SolverSession session(flow->initial_matrix(), flow->initial_c());
    const auto seq = run_sequence(session, *flow, 1000);
    std::vector<StepReport> reports;
    for (const auto& e : seq) reports.push_back(e.report);
    const SequenceSummary s = summarize(reports);
    out.zero_fraction.push_back(s.e_zero_fraction);
    out.support_mean.push_back(s.support_mean);
    out.bound_violations += s.bound_violations;
    out.polished_steps += s.polished_steps;
    out.steps += s.steps;
  }
  return out;
}

const SparseRuns& cached_sparse_runs() {
  static const SparseRuns runs = sparse_runs(0.1);
  return runs;
}

std::string join(const std::vector<double>& v, const char* f) {
  std::string out;
  for (double x : v) {
    if (!out.empty()) out += ' ';
    out += fmt(f, x);
  }
  return out;
}

Outcome criterion_excess() {
  const SparseRuns& r = cached_sparse_runs();
  Outcome o;
  o.pass = std::all_of(r.zero_fraction.begin(), r.zero_fraction.end(), [](double f) { return f >= 0.95; });
  o.detail = "fraction of steps with e_t = 0 per seed: " + join(r.zero_fraction, "%.3f") + " (each >= 0.95)";
  return o;
}

Outcome criterion_sparsity() {
  const SparseRuns& dense_c = cached_sparse_runs();
  const SparseRuns sparse_c = sparse_runs(0.01);
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  const double m1 = mean(dense_c.support_mean);
  const double m2 = mean(sparse_c.support_mean);
  Outcome o;
  o.pass = m1 >= 10.0 && m1 <= 30.0 && m2 >= 60.0 && m2 <= 95.0;
  o.detail = fmt("mean support %.1f at c-factor 0.1 (in [10, 30]), %.1f at c-factor 0.01 (in [60, 95])", m1, m2);
  return o;
}

Outcome criterion_complexity() {
  const SparseRuns& r = cached_sparse_runs();
  Outcome o;
  o.pass = r.bound_violations == 0 && r.steps > 0;
  o.detail = fmt("%.0f of %.0f steps exceed the multiplication bound", static_cast<double>(r.bound_violations),
                 static_cast<double>(r.steps));
  o.detail += fmt(" (polish ran on %.0f steps; its multiplications are reported separately)",
                  static_cast<double>(r.polished_steps));
  return o;
}

Outcome criterion_speed() {
  const FlowConfig fc = synthetic(1000, 0.1, 0, 500);
  auto f1 = make_flow(fc);
  auto f2 = make_flow(fc);
  SolverSession hones(f1->initial_matrix(), f1->initial_c());
  PgOptions pg_opt;
  pg_opt.tol = 1e-8;
  PgWarmSolver pg(f2->initial_matrix(), f2->initial_c(), pg_opt);
  std::int64_t hones_ns = 0;
  std::int64_t pg_ns = 0;
  // Totals over the steps where pg-warm reached the tolerance.
  std::int64_t hones_conv_ns = 0;
  std::int64_t pg_conv_ns = 0;
  Index pg_unconverged = 0;
  double worst_dx = 0.0;
  Vec x1 = hones.x();
  Vec x2 = pg.x();
  for (Index t = 0; t < fc.steps; ++t) {
    const FlowStep s1 = f1->next(x1);
    const FlowStep s2 = f2->next(x2);
    const StepReport r1 = hones.step(s1.g, s1.c);
    const StepReport r2 = pg.step(s2.g, s2.c);
    hones_ns += r1.wall_ns + r1.a_update_ns;
    pg_ns += r2.wall_ns + r2.a_update_ns;
    x1 = hones.x();
    x2 = pg.x();
    if (!(r2.kkt_residual <= pg_opt.tol)) {
      ++pg_unconverged;
      continue;
    }
    hones_conv_ns += r1.wall_ns + r1.a_update_ns;
    pg_conv_ns += r2.wall_ns + r2.a_update_ns;
    worst_dx = std::max(worst_dx, (x1 - x2).cwiseAbs().maxCoeff());
  }
  auto ratio_of = [](std::int64_t num, std::int64_t den) {
    return static_cast<double>(num) / static_cast<double>(std::max<std::int64_t>(den, 1));
  };
  const double ratio = ratio_of(pg_conv_ns, hones_conv_ns);
  Outcome o;
  o.pass = ratio >= 1.5;
  o.detail = fmt("steps where pg-warm converged: HONES %.3f s, pg-warm %.3f s, ratio %.2f (>= 1.5)",
                 static_cast<double>(hones_conv_ns) * 1e-9, static_cast<double>(pg_conv_ns) * 1e-9, ratio);
  o.detail += fmt("; all steps: ratio %.2f, pg-warm hit max_iter on %.0f", ratio_of(pg_ns, hones_ns),
                  static_cast<double>(pg_unconverged));
  o.detail += fmt("; max |x_hones - x_pg| on converged steps %.1e", worst_dx);
  return o;
}

Outcome criterion_lazy() {
  const FlowConfig fc = synthetic(100, 0.1, 0, 500);
  auto f1 = make_flow(fc);
  auto f2 = make_flow(fc);
  SolverConfig eager;
  eager.lazy_a = false;
  SolverSession lazy_s(f1->initial_matrix(), f1->initial_c());
  SolverSession eager_s(f2->initial_matrix(), f2->initial_c(), eager);
  Index mismatched_logs = 0;
  double worst_dx = 0.0;
  Vec x1 = lazy_s.x();
  Vec x2 = eager_s.x();
  for (Index t = 0; t < fc.steps; ++t) {
    const FlowStep s1 = f1->next(x1);
    const FlowStep s2 = f2->next(x2);
    lazy_s.step(s1.g, s1.c);
    eager_s.step(s2.g, s2.c);
    const auto& e1 = lazy_s.last_events();
    const auto& e2 = eager_s.last_events();
    bool same = e1.size() == e2.size();
    for (std::size_t k = 0; same && k < e1.size(); ++k)
      same = e1[k].leg == e2[k].leg && e1[k].index == e2[k].index && e1[k].kind == e2[k].kind &&
             e1[k].param == e2[k].param;
    if (!same) ++mismatched_logs;
    x1 = lazy_s.x();
    x2 = eager_s.x();
    worst_dx = std::max(worst_dx, (x1 - x2).cwiseAbs().maxCoeff());
  }
  Outcome o;
  o.pass = mismatched_logs == 0 && worst_dx <= 1e-9;
  o.detail = fmt("%.0f steps with differing event logs, max |x_lazy - x_eager| = %.2e (<= 1e-9), |S*| = %.0f",
                 static_cast<double>(mismatched_logs), worst_dx, static_cast<double>(lazy_s.s_star().size()));
  return o;
}

double rel_diff(const Vec& a, const Vec& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

Outcome criterion_state() {
  auto flow = make_flow(synthetic(30, 0.1, 0, 200));
  SolverSession session(flow->initial_matrix(), flow->initial_c());
  double worst_ratio = 0.0;
  Index checks = 0;
  session.set_event_observer([&](const SolverSession& s, const PathEvent&) {
    worst_ratio = std::max(worst_ratio, s.validate() / s.kappa());
    ++checks;
  });

  double worst_trip = 0.0;
  Index trips = 0;
  Vec x = session.x();
  PathScratch scratch;
  for (Index t = 0; t < 200; ++t) {
    const Support before = session.quadruple().support;
    const FlowStep st = flow->next(x);
    session.step(st.g, st.c);
    x = session.x();
    const Support& s = session.quadruple().support;
    if (s == before) continue;

    // Expand by every index outside S, then shrink it back out.
    const Mat a = session.a_current();
    const Vec zero = Vec::Zero(a.rows());
    const Par1 p1_ref = session.par1();
    const Par2 p2_ref = direct_update_par2(s, p1_ref, session.c(), st.g);
    for (Index j : s.complement()) {
      Support s2 = s;
      Par1 p1 = p1_ref;
      Par2 p2 = p2_ref;
      expand_support_lambda(0.0, s2, j, a, session.c(), st.g, p1, p2, scratch);
      shrink_support_lambda(s2, j, session.c(), p1, p2, scratch);
      double d = std::max(rel_diff(p1.eta_tilde, p1_ref.eta_tilde), rel_diff(p1.d, p1_ref.d));
      d = std::max(d, (p1.m.to_dense() - p1_ref.m.to_dense()).cwiseAbs().maxCoeff() /
                          std::max(1.0, p1_ref.m.to_dense().cwiseAbs().maxCoeff()));
      d = std::max({d, rel_diff(p2.eta, p2_ref.eta), rel_diff(p2.dg, p2_ref.dg), rel_diff(p2.dgg, p2_ref.dgg),
                    rel_diff(p2.dgc, p2_ref.dgc)});
      worst_trip = std::max(worst_trip, d);
      ++trips;
    }
  }
  Outcome o;
  o.pass = checks > 0 && worst_ratio <= 1e-8 && trips > 0 && worst_trip <= 1e-12;
  o.detail = fmt("%.0f events, max validate/kappa = %.2e (<= 1e-8); ", static_cast<double>(checks), worst_ratio);
  o.detail += fmt("%.0f expand-shrink round trips, max deviation %.2e (<= 1e-12)", static_cast<double>(trips),
                  worst_trip);
  return o;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int k = 1; k < argc; ++k) {
    const std::string arg = argv[k];
    if (arg == "--only" && k + 1 < argc) {
      std::stringstream list(argv[++k]);
      std::string item;
      while (std::getline(list, item, ',')) only.insert(std::stoi(item));
    } else {
      std::fprintf(stderr, "usage: hones_acceptance [--only 1,2,...]\n");
      return 2;
    }
  }

  const std::vector<Criterion> criteria = {
      {1, "oracle-equivalence", criterion_oracle},
      {2, "turning-point-lower-bound", criterion_lower_bound},
      {3, "excess-turning-points", criterion_excess},
      {4, "sparsity", criterion_sparsity},
      {5, "complexity-bound", criterion_complexity},
      {6, "relative-speed", criterion_speed},
      {7, "lazy-a-equivalence", criterion_lazy},
      {8, "state-consistency", criterion_state},
  };

  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && only.count(c.id) == 0) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("threw: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failed;
    std::printf("%s %d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
