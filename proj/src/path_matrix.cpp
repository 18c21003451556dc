#include "hones/path_matrix.hpp"

#include <cmath>

namespace hones {

namespace {
using u64 = std::uint64_t;
}

FindResult find_lambda(const Quadruple& q, const Par1& par1, const Par2& par2,
                       PathScratch& scratch, Index skip, Counters* counters) {
  const Index n = q.dim();
  const Vec& v = q.v;
  const double big_d = par1.d;
  const double dg = par2.dg;
  const double dg2 = dg * dg;
  const double w = dg * q.mu0 - par2.dgc;

  Vec& u = scratch.u;
  u.resize(n);
  for (Index i = 0; i < n; ++i) u(i) = w * (dg * par1.eta_tilde(i) - big_d * par2.eta(i));

  const double zeta = detail::zero_tolerance(v);
  double best = kInf;
  Index arg = -1;
  u64 ratios = 0;
  for (Index i = 0; i < n; ++i) {
    const double den = dg2 * v(i) - u(i);
    const bool in = q.support.contains(i);
    if (in ? !(den > 0.0) : !(den < 0.0)) continue;
    const bool at_zero = in ? v(i) <= zeta : v(i) >= -zeta;
    double alpha = 0.0;
    if (at_zero) {
      if (i == skip) continue;
      const double scale = std::abs(dg2 * v(i)) +
                           std::abs(w) * (std::abs(dg * par1.eta_tilde(i)) + std::abs(big_d * par2.eta(i)));
      if (std::abs(den) <= 1e-12 * scale) continue;
    } else {
      alpha = big_d * v(i) / den;
      ++ratios;
    }
    if (alpha < best) {
      best = alpha;
      arg = i;
    }
  }
  count(counters, Op::find_lambda, static_cast<u64>(4 * n) + ratios);

  FindResult out;
  if (arg < 0 || best * par2.dgg >= 1.0) return out;
  out.inc = std::max(0.0, best / (1.0 - best * par2.dgg));
  out.index = arg;
  out.enter = !q.support.contains(arg);
  return out;
}

void update_by_lambda(double inc, Quadruple& q, Par1& par1, Par2& par2, const PathScratch& scratch,
                      Counters* counters, const kernels::ExecPolicy& policy) {
  if (inc == 0.0) return;
  const Index n = q.dim();
  const double a0 = 1.0 / (1.0 + inc * par2.dgg);
  const double alpha = inc * a0;
  const double dg = par2.dg;
  const double denom = par1.d - alpha * dg * dg;
  if (!(denom > 1e-13 * par1.d) || !std::isfinite(denom))
    throw DegenerateDenominator("D - alpha D_g^2 collapsed");
  const double at = alpha / denom;
  const double w = dg * q.mu0 - par2.dgc;

  q.v.noalias() += at * scratch.u;
  q.mu0 += at * dg * w;

  // Lemma updates, all driven by the pre-step D_g.
  std::vector<double> right;
  right.reserve(static_cast<std::size_t>(q.support.size()));
  for (Index k : q.support) right.push_back(-alpha * par2.eta(k));
  kernels::rank1_columns(column_ptrs(par1.m, q.support), par2.eta.data(), right, n, policy);
  par1.eta_tilde.noalias() -= (alpha * dg) * par2.eta;
  par1.d -= alpha * dg * dg;
  par2.dg *= a0;
  par2.dgg *= a0;
  par2.dgc *= a0;
  par2.eta *= a0;

  const auto s = static_cast<u64>(q.support.size());
  count(counters, Op::update_lambda, static_cast<u64>(n) * s + 3 * static_cast<u64>(n) + s + 12);
}

void update_by_lambda(double inc, Quadruple& q, Par1& par1, Par2& par2) {
  PathScratch scratch;
  find_lambda(q, par1, par2, scratch);
  update_by_lambda(inc, q, par1, par2, scratch);
}

void expand_support_lambda(double lambda, Support& s, Index j, const Mat& a, const Vec& c,
                           const Vec& g, Par1& par1, Par2& par2, PathScratch& scratch,
                           Counters* counters, const kernels::ExecPolicy& policy) {
  if (s.contains(j)) throw InvalidProblem("expand: index already in support");
  const Index n = a.rows();
  const auto sz = static_cast<u64>(s.size());
  detail::gather_row(par1, s, j, scratch.row);
  const double eta_j = par2.eta(j);
  const double pivot = detail::schur_base(a, s, j, scratch.row) + lambda * g(j) * eta_j;
  const double pivot_scale = std::abs(a(j, j)) + lambda * g(j) * g(j);
  if (!(pivot > 1e-13 * pivot_scale) || !std::isfinite(pivot))
    throw DegeneratePivot("Schur pivot not positive for index " + std::to_string(j));
  scratch.a_tilde_jj = pivot;

  detail::build_gamma(a, s, j, scratch.row, &g, lambda * eta_j, scratch.gamma, policy);
  double b = -c(j);
  {
    std::size_t k = 0;
    for (Index col : s) b -= c(col) * scratch.row[k++];
  }
  scratch.b_js = b;

  const double inv = 1.0 / pivot;
  const double etj = par1.eta_tilde(j);
  par2.dg += eta_j * etj * inv;
  par2.dgg += eta_j * eta_j * inv;
  par2.dgc += eta_j * b * inv;

  detail::expand_par1(s, j, scratch.gamma, inv, scratch.row, par1, scratch.right, policy);
  detail::reflect_add(par2.eta, j, eta_j * inv, scratch.gamma);

  const auto nn = static_cast<u64>(n);
  count(counters, Op::expand_lambda, 2 * nn * sz + 4 * nn + 3 * sz + 12);
}

void shrink_support_lambda(Support& s, Index j, const Vec& c, Par1& par1, Par2& par2,
                           PathScratch& scratch, Counters* counters,
                           const kernels::ExecPolicy& policy) {
  if (!s.contains(j)) throw InvalidProblem("shrink: index not in support");
  const Index n = par1.m.dim();
  const double m_jj = detail::shrink_pivot(s, j, par1, scratch.beta);
  double b = -c(j) * m_jj;
  for (Index col : s)
    if (col != j) b -= c(col) * scratch.beta(col);
  scratch.b_tilde_js = b;

  const double eta_j = par2.eta(j);
  const double etj = par1.eta_tilde(j);
  const double inv = 1.0 / m_jj;
  par2.dg -= eta_j * etj * inv;
  par2.dgg -= eta_j * eta_j * inv;
  par2.dgc -= eta_j * b * inv;

  detail::shrink_par1(s, j, scratch.beta, m_jj, par1, scratch.right, policy);
  detail::reflect_add(par2.eta, j, -eta_j * inv, scratch.beta);

  const auto nn = static_cast<u64>(n);
  const auto sz = static_cast<u64>(s.size());
  count(counters, Op::shrink_lambda, nn * sz + 2 * nn + 2 * sz + 10);
}

void run_lambda_leg(const LegContext& ctx, const Vec& g, const Vec& c, Quadruple& q, Par1& par1,
                    Par2& par2, LegCursor& cursor, std::vector<PathEvent>& events) {
  const Index n = q.dim();
  const Index cap = detail::resolve_cap(ctx.cycle_cap, n);
  PathScratch scratch;
  while (cursor.param < 1.0) {
    const double remaining = 1.0 - cursor.param;
    const FindResult hit = find_lambda(q, par1, par2, scratch, cursor.last_index, ctx.counters);
    if (!(hit.inc < remaining)) {
      update_by_lambda(remaining, q, par1, par2, scratch, ctx.counters, ctx.policy);
      cursor.param = 1.0;
      break;
    }
    if (hit.index == cursor.last_index && hit.inc <= 1e-14)
      throw DegeneratePivot("index " + std::to_string(hit.index) + " toggled twice at one lambda");
    if (cursor.events >= cap)
      throw CycleLimit("matrix leg exceeded " + std::to_string(cap) + " turning points");

    update_by_lambda(hit.inc, q, par1, par2, scratch, ctx.counters, ctx.policy);
    q.v(hit.index) = 0.0;
    cursor.param += hit.inc;
    if (hit.enter) {
      if (ctx.ensure_column) ctx.ensure_column(hit.index);
      expand_support_lambda(cursor.param, q.support, hit.index, *ctx.a, c, g, par1, par2, scratch,
                            ctx.counters, ctx.policy);
    } else {
      shrink_support_lambda(q.support, hit.index, c, par1, par2, scratch, ctx.counters, ctx.policy);
    }
    cursor.last_index = hit.index;
    ++cursor.events;
    events.push_back(PathEvent{Leg::matrix, cursor.param, hit.index,
                               hit.enter ? EventKind::enter : EventKind::leave, q.support});
    if (ctx.on_event) ctx.on_event(events.back());
  }
}

}  // namespace hones
