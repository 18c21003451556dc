#pragma once

// Comparators for the sequential harness: a warm-started projected-gradient
// method ("pg-warm") and the static oracle re-run at every step.

#include <vector>

#include "hones/driver.hpp"
#include "hones/kkt.hpp"

namespace hones {

struct PgOptions {
  /// Stop once kkt_residual_primal <= tol.
  double tol = 1e-8;
  Index max_iter = 20000;
  /// Nonmonotone line-search window.
  Index memory = 10;
  /// Record the best-so-far residual after every iteration.
  bool trace = false;
};

struct PgResult {
  Vec x;
  Index iterations = 0;
  bool converged = false;
  double residual = kInf;
  std::vector<double> best_residual;
};

/// Projected gradient with Barzilai-Borwein steps and nonmonotone
/// backtracking, started from x0 (which must lie in the simplex). The first
/// step is 1 / max_i A_ii. Non-convergence is reported, not thrown.
PgResult pg_warmstart_solve(const Mat& a, const Vec& c, const Vec& x0, const PgOptions& options = {});
PgResult pg_warmstart_solve(const Problem& problem, const Vec& x0, const PgOptions& options = {});

/// pg-warm over a flow: A is updated in full every step (timed separately)
/// and each solve starts from the previous solution.
class PgWarmSolver : public SequentialSolver {
 public:
  PgWarmSolver(Mat a0, Vec c0, PgOptions options = {}, kernels::ExecPolicy policy = {});

  StepReport step(const Vec& g, const Vec& c_new) override;
  Vec x() const override { return x_; }
  Index dim() const override { return x_.size(); }

 private:
  Mat a_;
  Vec c_;
  Vec x_;
  PgOptions options_;
  kernels::ExecPolicy policy_;
  Index t_ = 0;
};

/// oracle_solve from scratch at every step.
class OracleSolver : public SequentialSolver {
 public:
  OracleSolver(Mat a0, Vec c0, OracleOptions options = {});

  StepReport step(const Vec& g, const Vec& c_new) override;
  Vec x() const override { return q_.x(); }
  Index dim() const override { return q_.dim(); }

 private:
  Mat a_;
  Vec c_;
  Quadruple q_;
  OracleOptions options_;
  Index t_ = 0;
};

}  // namespace hones
