#include "hones/kkt.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hones {

Mat MatrixView::block(const Support& s) const {
  const Index k = s.size();
  Mat out(k, k);
  for (Index b = 0; b < k; ++b)
    for (Index a = 0; a < k; ++a) out(a, b) = (*this)(s[static_cast<std::size_t>(a)], s[static_cast<std::size_t>(b)]);
  return out;
}

Mat MatrixView::columns(const Support& s) const {
  const Index n = dim();
  Mat out(n, s.size());
  for (Index b = 0; b < s.size(); ++b) {
    const Index j = s[static_cast<std::size_t>(b)];
    out.col(b) = base->col(j);
    if (g != nullptr && lambda != 0.0) out.col(b) += (lambda * (*g)(j)) * (*g);
  }
  return out;
}

Problem::Problem(Mat a, Vec c, Check check) : a_(std::move(a)), c_(std::move(c)) {
  if (a_.rows() != a_.cols() || a_.rows() < 1)
    throw InvalidProblem("A must be a non-empty square matrix");
  if (c_.size() != a_.rows()) throw DimensionMismatch("c does not match A");
  if (check == Check::none) return;
  const double scale = std::max(1.0, a_.cwiseAbs().maxCoeff());
  if ((a_ - a_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw InvalidProblem("A is not symmetric");
  Eigen::LLT<Mat> llt(a_);
  if (llt.info() != Eigen::Success) throw InvalidProblem("A is not positive definite");
}

Vec Quadruple::x() const {
  Vec out = Vec::Zero(v.size());
  for (Index j : support) out(j) = v(j);
  return out;
}

Vec Quadruple::mu() const {
  Vec out = -v;
  for (Index j : support) out(j) = 0.0;
  return out;
}

double sign_tolerance(const Vec& v) {
  const double vmax = v.size() > 0 ? v.cwiseAbs().maxCoeff() : 0.0;
  return 1e-12 * std::max(1.0, vmax);
}

Quadruple solve_given_support(const MatrixView& a, const Vec& c, const Support& support,
                              double condition_cap) {
  const Index n = a.dim();
  if (c.size() != n || support.dim() != n) throw DimensionMismatch("support/problem size mismatch");
  if (support.empty()) throw EmptySupport("solve_given_support needs a non-empty support");

  const Mat ass = a.block(support);
  Eigen::LLT<Mat> llt(ass);
  if (llt.info() != Eigen::Success) throw SingularSubmatrix("Cholesky of A_SS failed");
  if (llt.rcond() * condition_cap < 1.0) throw SingularSubmatrix("A_SS condition estimate exceeds cap");

  const Index s = support.size();
  Vec cs(s);
  for (Index k = 0; k < s; ++k) cs(k) = c(support[static_cast<std::size_t>(k)]);
  const Vec p = llt.solve(Vec::Ones(s));
  const Vec q = llt.solve(cs);
  const double mu0 = (1.0 - q.sum()) / p.sum();
  const Vec xs = mu0 * p + q;

  Quadruple out{support, Vec(n), mu0};
  const Vec ax = a.columns(support) * xs;
  out.v = -(ax.array() - mu0 - c.array()).matrix();
  for (Index k = 0; k < s; ++k) out.v(support[static_cast<std::size_t>(k)]) = xs(k);
  return out;
}

Quadruple solve_given_support(const Problem& problem, const Support& support, double condition_cap) {
  return solve_given_support(problem.view(), problem.c(), support, condition_cap);
}

double kkt_residual(const MatrixView& a, const Vec& c, const Quadruple& q) {
  const Index n = a.dim();
  const Vec x = q.x();
  const Vec mu = q.mu();
  Vec ax = Vec::Zero(n);
  for (Index j : q.support) {
    ax += x(j) * a.base->col(j);
    if (a.g != nullptr && a.lambda != 0.0) ax += (a.lambda * (*a.g)(j) * x(j)) * (*a.g);
  }
  double r = (ax.array() - q.mu0 - mu.array() - c.array()).abs().maxCoeff();
  r = std::max(r, std::abs(x.sum() - 1.0));
  r = std::max(r, (mu.array() * x.array()).abs().maxCoeff());
  r = std::max(r, std::max(0.0, -x.minCoeff()));
  r = std::max(r, std::max(0.0, -mu.minCoeff()));
  return r;
}

double kkt_residual(const Problem& problem, const Quadruple& q) {
  return kkt_residual(problem.view(), problem.c(), q);
}

double kkt_residual_primal(const Vec& ax, const Vec& c, const Vec& x) {
  const Vec r = ax - c;
  double lo = kInf;
  double hi = -kInf;
  for (Index i = 0; i < x.size(); ++i) {
    if (x(i) > 0.0) {
      lo = std::min(lo, r(i));
      hi = std::max(hi, r(i));
    }
  }
  if (!(lo <= hi)) return kInf;  // x has no positive entry
  const double mu0 = 0.5 * (lo + hi);
  double res = 0.5 * (hi - lo);
  for (Index i = 0; i < x.size(); ++i) {
    if (x(i) > 0.0) continue;
    res = std::max(res, std::max(0.0, -(r(i) - mu0)));  // negative multiplier
  }
  res = std::max(res, std::abs(x.sum() - 1.0));
  res = std::max(res, std::max(0.0, -x.minCoeff()));
  return res;
}

double kkt_residual_primal(const Problem& problem, const Vec& x) {
  return kkt_residual_primal(problem.A() * x, problem.c(), x);
}

namespace {

double quadruple_scale(const Quadruple& q) {
  return std::max({1.0, std::abs(q.mu0), q.v.cwiseAbs().maxCoeff()});
}

/// Drops zero-valued support coordinates until x_S > zeta.
Quadruple tighten_support(const Problem& problem, Quadruple q, double cap) {
  for (;;) {
    const double zeta = sign_tolerance(q.v);
    Support s = q.support;
    bool changed = false;
    for (Index j : q.support) {
      if (q.v(j) <= zeta && s.size() > 1) {
        s.erase(j);
        changed = true;
      }
    }
    if (!changed) return q;
    q = solve_given_support(problem, s, cap);
  }
}

bool kkt_feasible(const Quadruple& q, double tol) {
  for (Index i = 0; i < q.dim(); ++i) {
    if (q.support.contains(i) ? q.v(i) < -tol : q.v(i) > tol) return false;
  }
  return true;
}

}  // namespace

Quadruple enumerate_solve(const Problem& problem, double condition_cap) {
  const Index n = problem.dim();
  if (n > 20) throw InvalidProblem("exhaustive enumeration limited to n <= 20");
  bool found = false;
  double best_obj = kInf;
  Quadruple best;
  const std::uint32_t total = (std::uint32_t{1} << n);
  for (std::uint32_t mask = 1; mask < total; ++mask) {
    std::vector<Index> idx;
    for (Index i = 0; i < n; ++i)
      if (mask & (std::uint32_t{1} << i)) idx.push_back(i);
    Quadruple q;
    try {
      q = solve_given_support(problem, Support(n, idx), condition_cap);
    } catch (const SingularSubmatrix&) {
      continue;
    }
    if (!kkt_feasible(q, 1e-10 * quadruple_scale(q))) continue;
    const double obj = problem.objective(q.x());
    if (!found || obj < best_obj) {
      found = true;
      best_obj = obj;
      best = std::move(q);
    }
  }
  if (!found) throw NoConvergence("no KKT-feasible support found by enumeration");
  return tighten_support(problem, std::move(best), condition_cap);
}

Quadruple oracle_solve(const Problem& problem, const OracleOptions& options) {
  const Index n = problem.dim();
  if (options.force_exhaustive) return enumerate_solve(problem, options.condition_cap);

  const Index cap = options.max_changes > 0 ? options.max_changes : 50 * n;
  Vec x = Vec::Constant(n, 1.0 / static_cast<double>(n));
  Support free = Support::full(n);
  Index changes = 0;
  constexpr double kNegX = 1e-14;

  try {
    while (changes <= cap) {
      const Quadruple q = solve_given_support(problem, free, options.condition_cap);
      Index blocking = -1;
      double step = 1.0;
      for (Index j : free) {
        const double target = q.v(j);
        if (target >= -kNegX) continue;
        const double ratio = x(j) / (x(j) - target);
        if (ratio < step || blocking < 0) {
          if (ratio <= step) {
            step = ratio;
            blocking = j;
          }
        }
      }
      if (blocking < 0) {
        x = q.x().cwiseMax(0.0);
        const double tol = 1e-12 * quadruple_scale(q);
        Index entering = -1;
        double most_negative = -tol;
        for (Index i = 0; i < n; ++i) {
          if (free.contains(i)) continue;
          const double mu = -q.v(i);
          if (mu < most_negative) {
            most_negative = mu;
            entering = i;
          }
        }
        if (entering < 0) {
          Quadruple out = tighten_support(problem, q, options.condition_cap);
          const double tol_res = 1e-9 * quadruple_scale(out);
          if (kkt_feasible(out, 1e-10 * quadruple_scale(out)) && kkt_residual(problem, out) <= tol_res)
            return out;
          break;
        }
        free.insert(entering);
      } else {
        const Vec target = q.x();
        for (Index j : free) x(j) += step * (target(j) - x(j));
        x(blocking) = 0.0;
        free.erase(blocking);
      }
      ++changes;
    }
  } catch (const SingularSubmatrix&) {
    // fall through to enumeration
  }

  if (options.exhaustive_fallback && n <= 12) return enumerate_solve(problem, options.condition_cap);
  throw NoConvergence("active-set oracle did not converge within " + std::to_string(cap) +
                      " working-set changes");
}

Vec project_simplex(const Vec& y) {
  const Index n = y.size();
  std::vector<double> sorted(y.data(), y.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (Index k = 0; k < n; ++k) {
    cumsum += sorted[static_cast<std::size_t>(k)];
    const double t = (cumsum - 1.0) / static_cast<double>(k + 1);
    if (sorted[static_cast<std::size_t>(k)] - t > 0.0) theta = t;
  }
  return (y.array() - theta).cwiseMax(0.0).matrix();
}

}  // namespace hones
