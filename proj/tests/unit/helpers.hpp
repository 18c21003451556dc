#pragma once

#include <Eigen/Dense>

#include "hones/flows.hpp"
#include "hones/kkt.hpp"
#include "hones/state.hpp"

namespace hones::test {

inline Mat random_spd(Index n, std::uint64_t seed, double ridge = 0.5) {
  Rng rng(seed);
  Mat b(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) b(i, j) = rng.normal();
  Mat a = b * b.transpose() / static_cast<double>(n);
  a.diagonal().array() += ridge;
  return a;
}

inline Support make_support(Index n, std::vector<Index> idx) { return Support(n, std::move(idx)); }

/// Bordered KKT solve on S with a full-pivot LU, independent of the library.
struct BorderedSolution {
  Vec x;
  double mu0 = 0.0;
  Vec mu;
};

inline BorderedSolution bordered_solve(const Mat& a, const Vec& c, const Support& s) {
  const Index k = s.size();
  Mat k_mat = Mat::Zero(k + 1, k + 1);
  Vec rhs(k + 1);
  for (Index p = 0; p < k; ++p) {
    for (Index q = 0; q < k; ++q) k_mat(p, q) = a(s[p], s[q]);
    k_mat(p, k) = -1.0;
    k_mat(k, p) = 1.0;
    rhs(p) = c(s[p]);
  }
  rhs(k) = 1.0;
  const Vec sol = k_mat.fullPivLu().solve(rhs);
  BorderedSolution out;
  out.x = Vec::Zero(a.rows());
  for (Index p = 0; p < k; ++p) out.x(s[p]) = sol(p);
  out.mu0 = sol(k);
  out.mu = a * out.x - Vec::Constant(a.rows(), out.mu0) - c;
  for (Index i : s) out.mu(i) = 0.0;
  return out;
}

/// Par1 from its definition with an explicit inverse.
struct DefinedPar1 {
  Mat m;
  Vec eta_tilde;
  double d = 0.0;
};

inline DefinedPar1 defined_par1(const Mat& a, const Support& s) {
  const Index n = a.rows();
  const std::vector<Index> sc = s.complement();
  Mat a_ss(s.size(), s.size());
  for (Index p = 0; p < s.size(); ++p)
    for (Index q = 0; q < s.size(); ++q) a_ss(p, q) = a(s[p], s[q]);
  const Mat inv = a_ss.fullPivLu().inverse();
  DefinedPar1 out;
  out.m = Mat::Zero(n, n);
  for (Index p = 0; p < s.size(); ++p)
    for (Index q = 0; q < s.size(); ++q) out.m(s[p], s[q]) = inv(p, q);
  for (Index i : sc)
    for (Index q = 0; q < s.size(); ++q) {
      double acc = 0.0;
      for (Index p = 0; p < s.size(); ++p) acc += a(i, s[p]) * inv(p, q);
      out.m(i, s[q]) = -acc;
    }
  Vec ones_sc = Vec::Zero(n);
  for (Index i : sc) ones_sc(i) = 1.0;
  out.eta_tilde = ones_sc + out.m * Vec::Ones(n);
  for (Index i : s) out.d += out.eta_tilde(i);
  return out;
}

inline double max_abs_diff(const Mat& a, const Mat& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace hones::test
