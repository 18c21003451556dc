#pragma once

// Static simplex-constrained QP machinery:
//
//   minimize 1/2 x^T A x - c^T x   subject to  1^T x = 1, x >= 0.
//
// KKT: A x - mu0 1 - mu - c = 0, 1^T x = 1, mu_i x_i = 0, mu, x >= 0.

#include "hones/types.hpp"

namespace hones {

/// Read-only view of A + lambda * g g^T. Only the columns that are read
/// need to be current in `base`.
struct MatrixView {
  const Mat* base = nullptr;
  const Vec* g = nullptr;
  double lambda = 0.0;

  MatrixView() = default;
  explicit MatrixView(const Mat& a) : base(&a) {}
  MatrixView(const Mat& a, const Vec& dir, double lam) : base(&a), g(&dir), lambda(lam) {}

  Index dim() const { return base->rows(); }
  double operator()(Index i, Index j) const {
    double a = (*base)(i, j);
    if (g != nullptr && lambda != 0.0) a += lambda * (*g)(i) * (*g)(j);
    return a;
  }
  /// A_{S,S} as a dense |S| x |S| block.
  Mat block(const Support& s) const;
  /// A_{.,S} as a dense n x |S| block.
  Mat columns(const Support& s) const;
};

class Problem {
 public:
  enum class Check { full, none };

  /// Throws InvalidProblem unless A is square, symmetric (1e-10 relative) and
  /// positive definite (Cholesky) and c matches.
  Problem(Mat a, Vec c, Check check = Check::full);

  const Mat& A() const { return a_; }
  const Vec& c() const { return c_; }
  Index dim() const { return a_.rows(); }
  MatrixView view() const { return MatrixView(a_); }

  double objective(const Vec& x) const { return 0.5 * x.dot(a_ * x) - c_.dot(x); }

 private:
  Mat a_;
  Vec c_;
};

/// Complete KKT certificate: v_S = x_S, v_{S^c} = -mu_{S^c}, plus mu0.
struct Quadruple {
  Support support;
  Vec v;
  double mu0 = 0.0;

  Index dim() const { return v.size(); }
  Vec x() const;
  Vec mu() const;
};

/// Sign-feasibility threshold zeta = 1e-12 * max(1, |v|_inf).
double sign_tolerance(const Vec& v);

/// Solves the KKT system restricted to `support` without sign checks.
/// Throws SingularSubmatrix when the Cholesky factorization of A_SS fails or
/// its condition estimate exceeds `condition_cap`.
Quadruple solve_given_support(const MatrixView& a, const Vec& c, const Support& support,
                              double condition_cap = 1e12);
Quadruple solve_given_support(const Problem& problem, const Support& support,
                              double condition_cap = 1e12);

/// Max-norm KKT violation of (x, mu, mu0): stationarity, sum-to-one,
/// complementarity, primal and dual sign violation. Reads A only on the
/// support columns.
double kkt_residual(const MatrixView& a, const Vec& c, const Quadruple& q);
double kkt_residual(const Problem& problem, const Quadruple& q);

/// Residual of a primal point with reconstructed multipliers: mu0 is the
/// midrange of (A x - c) on supp(x), mu_i = (A x - c)_i - mu0 off it.
double kkt_residual_primal(const Problem& problem, const Vec& x);
double kkt_residual_primal(const Vec& ax, const Vec& c, const Vec& x);

struct OracleOptions {
  /// Cap on working-set changes; 0 means 50 * n.
  Index max_changes = 0;
  /// Enumerate every support when the active-set loop fails and n <= 12.
  bool exhaustive_fallback = true;
  /// Skip the active-set loop and enumerate (n <= 20 only).
  bool force_exhaustive = false;
  double condition_cap = 1e12;
};

/// Primal active-set method from the uniform point, with exhaustive support
/// enumeration as a fallback for n <= 12.
Quadruple oracle_solve(const Problem& problem, const OracleOptions& options = {});

/// Enumerates all 2^n - 1 supports; keeps the KKT-feasible one of least
/// objective. Throws NoConvergence when none is feasible.
Quadruple enumerate_solve(const Problem& problem, double condition_cap = 1e12);

/// Euclidean projection onto the probability simplex (sort based).
Vec project_simplex(const Vec& y);

}  // namespace hones
