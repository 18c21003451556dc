#include "hones/path_vector.hpp"

#include <cmath>

namespace hones {

namespace {
using u64 = std::uint64_t;
}

FindResult find_utilde_lambda(const Quadruple& q, const Par1& par1, const Par3& par3,
                              PathScratch& scratch, Index skip, Counters* counters) {
  const Index n = q.dim();
  const Vec& v = q.v;
  const double r = par3.dl / par1.d;
  Vec& d = scratch.d;
  d.resize(n);
  for (Index i = 0; i < n; ++i) d(i) = par3.xi(i) - r * par1.eta_tilde(i);

  const double zeta = detail::zero_tolerance(v);
  double best = kInf;
  Index arg = -1;
  u64 ratios = 0;
  for (Index i = 0; i < n; ++i) {
    const double di = d(i);
    const bool in = q.support.contains(i);
    if (in ? !(di > 0.0) : !(di < 0.0)) continue;
    const bool at_zero = in ? v(i) <= zeta : v(i) >= -zeta;
    double step = 0.0;
    if (at_zero) {
      if (i == skip) continue;
      const double scale = std::abs(par3.xi(i)) + std::abs(r * par1.eta_tilde(i));
      if (std::abs(di) <= 1e-12 * scale) continue;
    } else {
      step = v(i) / di;
      ++ratios;
    }
    if (step < best) {
      best = step;
      arg = i;
    }
  }
  count(counters, Op::find_utilde, static_cast<u64>(n) + ratios + 1);

  FindResult out;
  if (arg < 0) return out;
  out.inc = std::max(0.0, best);
  out.index = arg;
  out.enter = !q.support.contains(arg);
  return out;
}

void update_by_utilde_lambda(double inc, Quadruple& q, const Par1& par1, const Par3& par3,
                             const PathScratch& scratch, Counters* counters) {
  if (inc == 0.0) return;
  q.v.noalias() -= inc * scratch.d;
  q.mu0 += (par3.dl / par1.d) * inc;
  count(counters, Op::update_utilde, static_cast<u64>(q.dim()) + 1);
}

void update_by_utilde_lambda(double inc, Quadruple& q, const Par1& par1, const Par3& par3) {
  PathScratch scratch;
  find_utilde_lambda(q, par1, par3, scratch);
  update_by_utilde_lambda(inc, q, par1, par3, scratch);
}

void expand_support_utilde(Support& s, Index j, const Mat& a, Par1& par1, Par3& par3,
                           PathScratch& scratch, Counters* counters,
                           const kernels::ExecPolicy& policy) {
  if (s.contains(j)) throw InvalidProblem("expand: index already in support");
  const Index n = a.rows();
  const auto sz = static_cast<u64>(s.size());
  detail::gather_row(par1, s, j, scratch.row);
  const double pivot = detail::schur_base(a, s, j, scratch.row);
  if (!(pivot > 1e-13 * std::abs(a(j, j))) || !std::isfinite(pivot))
    throw DegeneratePivot("Schur pivot not positive for index " + std::to_string(j));
  scratch.a_tilde_jj = pivot;
  detail::build_gamma(a, s, j, scratch.row, nullptr, 0.0, scratch.gamma, policy);

  const double inv = 1.0 / pivot;
  const double xi_j = par3.xi(j);
  par3.dl += xi_j * par1.eta_tilde(j) * inv;
  detail::expand_par1(s, j, scratch.gamma, inv, scratch.row, par1, scratch.right, policy);
  detail::reflect_add(par3.xi, j, xi_j * inv, scratch.gamma);

  const auto nn = static_cast<u64>(n);
  count(counters, Op::expand_utilde, 2 * nn * sz + 3 * nn + 2 * sz + 8);
}

void shrink_support_utilde(Support& s, Index j, Par1& par1, Par3& par3, PathScratch& scratch,
                           Counters* counters, const kernels::ExecPolicy& policy) {
  if (!s.contains(j)) throw InvalidProblem("shrink: index not in support");
  const Index n = par1.m.dim();
  const double m_jj = detail::shrink_pivot(s, j, par1, scratch.beta);
  const double inv = 1.0 / m_jj;
  const double xi_j = par3.xi(j);
  par3.dl -= xi_j * par1.eta_tilde(j) * inv;
  detail::shrink_par1(s, j, scratch.beta, m_jj, par1, scratch.right, policy);
  detail::reflect_add(par3.xi, j, -xi_j * inv, scratch.beta);

  const auto nn = static_cast<u64>(n);
  const auto sz = static_cast<u64>(s.size());
  count(counters, Op::shrink_utilde, nn * sz + 2 * nn + sz + 6);
}

void run_utilde_leg(const LegContext& ctx, Quadruple& q, Par1& par1, Par3& par3, LegCursor& cursor,
                    std::vector<PathEvent>& events) {
  const Index n = q.dim();
  const Index cap = detail::resolve_cap(ctx.cycle_cap, n);
  PathScratch scratch;
  while (cursor.param < 1.0) {
    const double remaining = 1.0 - cursor.param;
    const FindResult hit = find_utilde_lambda(q, par1, par3, scratch, cursor.last_index, ctx.counters);
    if (!(hit.inc < remaining)) {
      update_by_utilde_lambda(remaining, q, par1, par3, scratch, ctx.counters);
      cursor.param = 1.0;
      break;
    }
    if (hit.index == cursor.last_index && hit.inc <= 1e-14)
      throw DegeneratePivot("index " + std::to_string(hit.index) + " toggled twice at one lambda~");
    if (cursor.events >= cap)
      throw CycleLimit("vector leg exceeded " + std::to_string(cap) + " turning points");

    update_by_utilde_lambda(hit.inc, q, par1, par3, scratch, ctx.counters);
    q.v(hit.index) = 0.0;
    cursor.param += hit.inc;
    if (hit.enter) {
      if (ctx.ensure_column) ctx.ensure_column(hit.index);
      expand_support_utilde(q.support, hit.index, *ctx.a, par1, par3, scratch, ctx.counters,
                            ctx.policy);
    } else {
      shrink_support_utilde(q.support, hit.index, par1, par3, scratch, ctx.counters, ctx.policy);
    }
    cursor.last_index = hit.index;
    ++cursor.events;
    events.push_back(PathEvent{Leg::vector, cursor.param, hit.index,
                               hit.enter ? EventKind::enter : EventKind::leave, q.support});
    if (ctx.on_event) ctx.on_event(events.back());
  }
}

}  // namespace hones
