#include "hones/path_common.hpp"

#include <cmath>

namespace hones::detail {

double zero_tolerance(const Vec& v) { return sign_tolerance(v); }

void gather_row(const Par1& par1, const Support& s, Index j, std::vector<double>& out) {
  out.resize(static_cast<std::size_t>(s.size()));
  std::size_t k = 0;
  for (Index c : s) out[k++] = par1.m.col(c)[j];
}

double schur_base(const Mat& a, const Support& s, Index j, const std::vector<double>& m_js) {
  double acc = a(j, j);
  std::size_t k = 0;
  for (Index c : s) acc += m_js[k++] * a(c, j);
  return acc;
}

void build_gamma(const Mat& a, const Support& s, Index j, const std::vector<double>& m_js,
                 const Vec* g, double extra, Vec& gamma, const kernels::ExecPolicy& policy) {
  const Index n = a.rows();
  gamma = -a.col(j);
  if (g != nullptr && extra != 0.0) gamma.noalias() -= extra * (*g);
  std::vector<double> coeff(m_js.size());
  for (std::size_t k = 0; k < m_js.size(); ++k) coeff[k] = -m_js[k];
  kernels::combine_columns(column_ptrs(a, s), coeff, gamma.data(), n, policy);
  std::size_t k = 0;
  for (Index c : s) gamma(c) = m_js[k++];
  gamma(j) = 1.0;
}

void expand_par1(Support& s, Index j, const Vec& gamma, double inv_pivot,
                 const std::vector<double>& m_js, Par1& par1, std::vector<double>& right,
                 const kernels::ExecPolicy& policy) {
  const Index n = gamma.size();
  const double etj = par1.eta_tilde(j);
  // Written as eta~_j^2 / M_jj from the stored values, the same expression
  // shrink_par1 subtracts, so a round trip cancels to working precision of D.
  const double etj_new = etj * inv_pivot;
  par1.d += static_cast<long double>(etj_new) * etj_new / inv_pivot;

  right.resize(m_js.size());
  for (std::size_t k = 0; k < m_js.size(); ++k) right[k] = m_js[k] * inv_pivot;
  auto cols = column_ptrs(par1.m, s);
  for (double* col : cols) col[j] = 0.0;
  kernels::rank1_columns(cols, gamma.data(), right, n, policy);

  par1.m.activate(j);
  double* cj = par1.m.col(j);
  for (Index i = 0; i < n; ++i) cj[i] = gamma(i) * inv_pivot;

  reflect_add(par1.eta_tilde, j, etj * inv_pivot, gamma);
  s.insert(j);
}

double shrink_pivot(const Support& s, Index j, const Par1& par1, Vec& beta) {
  if (s.size() <= 1) throw EmptySupport("cannot remove the last support index");
  const Index n = par1.m.dim();
  const double m_jj = par1.m.col(j)[j];
  if (!(m_jj > 0.0) || !std::isfinite(m_jj))
    throw DegeneratePivot("M_jj is not positive for index " + std::to_string(j));
  beta = Eigen::Map<const Vec>(par1.m.col(j), n);
  beta(j) = -1.0;
  return m_jj;
}

void shrink_par1(Support& s, Index j, const Vec& beta, double m_jj, Par1& par1,
                 std::vector<double>& right, const kernels::ExecPolicy& policy) {
  const Index n = beta.size();
  const double etj = par1.eta_tilde(j);
  const double inv = 1.0 / m_jj;
  par1.d -= static_cast<long double>(etj) * etj / m_jj;

  s.erase(j);
  auto cols = column_ptrs(par1.m, s);
  right.resize(cols.size());
  for (std::size_t k = 0; k < cols.size(); ++k) {
    right[k] = -cols[k][j] * inv;
    cols[k][j] = 0.0;
  }
  kernels::rank1_columns(cols, beta.data(), right, n, policy);
  par1.m.deactivate(j);

  reflect_add(par1.eta_tilde, j, -etj * inv, beta);
}

void reflect_add(Vec& v, Index j, double coef, const Vec& w) {
  v(j) = 0.0;
  v.noalias() += coef * w;
}

Index resolve_cap(Index cap, Index n) { return cap > 0 ? cap : 10 * n; }

}  // namespace hones::detail
