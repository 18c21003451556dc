#include "hones/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>

namespace hones {

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_ns(Clock::time_point since) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - since).count();
}

/// out = A z using only the nonzero entries of z.
void sparse_mul(const Mat& a, const Vec& z, Vec& out) {
  out.setZero(a.rows());
  for (Index j = 0; j < z.size(); ++j)
    if (z(j) != 0.0) out.noalias() += z(j) * a.col(j);
}

Index positive_count(const Vec& x) { return (x.array() > 0.0).count(); }

void rank1_all(Mat& a, const Vec& g, const kernels::ExecPolicy& policy) {
  const Index n = a.rows();
  std::vector<double*> cols(static_cast<std::size_t>(n));
  std::vector<double> right(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) {
    cols[static_cast<std::size_t>(j)] = a.col(j).data();
    right[static_cast<std::size_t>(j)] = g(j);
  }
  kernels::rank1_columns(cols, g.data(), right, n, policy);
}

}  // namespace

PgResult pg_warmstart_solve(const Mat& a, const Vec& c, const Vec& x0, const PgOptions& options) {
  const Index n = a.rows();
  if (a.cols() != n || c.size() != n || x0.size() != n) throw DimensionMismatch("pg-warm inputs");
  PgResult r;
  r.x = x0;
  Vec ax;
  sparse_mul(a, r.x, ax);
  Vec grad = ax - c;
  double f = 0.5 * r.x.dot(ax) - c.dot(r.x);
  r.residual = kkt_residual_primal(ax, c, r.x);
  double best = r.residual;
  if (r.residual <= options.tol) {
    r.converged = true;
    return r;
  }

  double alpha = 1.0 / a.diagonal().maxCoeff();
  std::deque<double> history{f};
  Vec d;
  Vec ad;
  for (Index k = 1; k <= options.max_iter; ++k) {
    r.iterations = k;
    d = project_simplex(r.x - alpha * grad) - r.x;
    sparse_mul(a, d, ad);
    // d sums to zero, so shifting grad by a constant leaves grad . d
    // unchanged; the shift removes the cancellation near the optimum.
    Index top = 0;
    r.x.maxCoeff(&top);
    const double gd = (grad.array() - grad(top)).matrix().dot(d);
    const double dad = d.dot(ad);
    if (!(gd < 0.0)) break;  // no descent left at working precision

    const double f_ref = *std::max_element(history.begin(), history.end());
    double t = 1.0;
    while (f + t * gd + 0.5 * t * t * dad > f_ref + 1e-4 * t * gd && t > 1e-20) t *= 0.5;

    r.x.noalias() += t * d;
    ax.noalias() += t * ad;
    grad = ax - c;
    f += t * gd + 0.5 * t * t * dad;
    history.push_back(f);
    if (static_cast<Index>(history.size()) > options.memory) history.pop_front();

    const double sy = t * t * dad;
    const double ss = t * t * d.squaredNorm();
    alpha = sy > 0.0 ? std::clamp(ss / sy, 1e-10, 1e10) : 1e10;

    r.residual = kkt_residual_primal(ax, c, r.x);
    if (r.residual <= options.tol) {
      // The running A x drifts; confirm against a fresh product.
      sparse_mul(a, r.x, ax);
      grad = ax - c;
      f = 0.5 * r.x.dot(ax) - c.dot(r.x);
      r.residual = kkt_residual_primal(ax, c, r.x);
    }
    best = std::min(best, r.residual);
    if (options.trace) r.best_residual.push_back(best);
    if (r.residual <= options.tol) {
      r.converged = true;
      break;
    }
  }
  return r;
}

PgResult pg_warmstart_solve(const Problem& problem, const Vec& x0, const PgOptions& options) {
  return pg_warmstart_solve(problem.A(), problem.c(), x0, options);
}

PgWarmSolver::PgWarmSolver(Mat a0, Vec c0, PgOptions options, kernels::ExecPolicy policy)
    : options_(options), policy_(policy) {
  const Problem problem(std::move(a0), std::move(c0));
  x_ = oracle_solve(problem).x();
  a_ = problem.A();
  c_ = problem.c();
}

StepReport PgWarmSolver::step(const Vec& g, const Vec& c_new) {
  if (g.size() != dim() || c_new.size() != dim()) throw DimensionMismatch("step inputs do not match n");
  ++t_;
  const auto a_start = Clock::now();
  rank1_all(a_, g, policy_);
  const std::int64_t a_ns = elapsed_ns(a_start);

  const auto start = Clock::now();
  c_ = c_new;
  const Index before = positive_count(x_);
  PgResult res = pg_warmstart_solve(a_, c_, x_, options_);
  x_ = std::move(res.x);

  StepReport r;
  r.wall_ns = elapsed_ns(start);
  r.a_update_ns = a_ns;
  r.t = t_;
  r.support_size = positive_count(x_);
  r.s_max = std::max(before, r.support_size);
  r.kkt_residual = res.residual;
  r.iterations = res.iterations;
  return r;
}

OracleSolver::OracleSolver(Mat a0, Vec c0, OracleOptions options) : options_(options) {
  const Problem problem(std::move(a0), std::move(c0));
  q_ = oracle_solve(problem, options_);
  a_ = problem.A();
  c_ = problem.c();
}

StepReport OracleSolver::step(const Vec& g, const Vec& c_new) {
  if (g.size() != dim() || c_new.size() != dim()) throw DimensionMismatch("step inputs do not match n");
  ++t_;
  const auto a_start = Clock::now();
  a_.noalias() += g * g.transpose();
  const std::int64_t a_ns = elapsed_ns(a_start);

  const auto start = Clock::now();
  c_ = c_new;
  const Support prev = q_.support;
  const Problem problem(a_, c_, Problem::Check::none);
  q_ = oracle_solve(problem, options_);

  StepReport r;
  r.wall_ns = elapsed_ns(start);
  r.a_update_ns = a_ns;
  r.t = t_;
  r.support_size = q_.support.size();
  r.support_change = symmetric_difference_size(prev, q_.support);
  r.s_max = std::max(prev.size(), r.support_size);
  r.kkt_residual = kkt_residual(problem, q_);
  return r;
}

}  // namespace hones
