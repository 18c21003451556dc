#include "hones/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <istream>
#include <ostream>

#include "hones/flows.hpp"
#include "hones/path_matrix.hpp"
#include "hones/path_vector.hpp"

namespace hones {

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_ns(Clock::time_point since) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - since).count();
}

bool sign_feasible(const Quadruple& q) {
  const double zeta = sign_tolerance(q.v);
  for (Index i = 0; i < q.dim(); ++i) {
    if (q.support.contains(i) ? !(q.v(i) > 0.0) : q.v(i) > zeta) return false;
  }
  return true;
}

template <typename Fn>
void with_retry(Fn&& attempt, const std::function<void()>& recover) {
  try {
    attempt();
    return;
  } catch (const DegeneratePivot&) {
  } catch (const DegenerateDenominator&) {
  } catch (const CycleLimit&) {
  }
  recover();
  attempt();
}

}  // namespace

std::uint64_t complexity_bound(Index n, Index s, Index s_star, Index k_a, Index k_c) {
  const auto nn = static_cast<std::uint64_t>(n);
  const auto ss = static_cast<std::uint64_t>(s);
  const auto ka = static_cast<std::uint64_t>(k_a);
  const auto kc = static_cast<std::uint64_t>(k_c);
  return nn * static_cast<std::uint64_t>(s_star) + nn * ss * (3 * ka + 2 * kc + 2) +
         nn * (12 * ka + 6 * kc + 3) + 100 * (ka + kc + 1);
}

SolverSession::SolverSession(Mat a0, Vec c0, SolverConfig config) : config_(std::move(config)) {
  const Problem problem(std::move(a0), std::move(c0));
  n_ = problem.dim();
  q_ = oracle_solve(problem, config_.oracle);
  a_ = problem.A();
  c_ = problem.c();
  applied_.assign(static_cast<std::size_t>(n_), 0);
  s_star_ = q_.support;
  par1_ = init_par1(MatrixView(a_), q_.support, config_.m_layout);
  counters_.enabled = config_.counters;
}

Mat SolverSession::a_current() const {
  Mat out = a_;
  for (Index j = 0; j < n_; ++j) {
    for (std::size_t k = applied_[static_cast<std::size_t>(j)] - g_base_; k < g_log_.size(); ++k)
      out.col(j) += g_log_[k] * g_log_[k](j);
  }
  return out;
}

void SolverSession::catch_up(Index j) {
  auto& done = applied_[static_cast<std::size_t>(j)];
  double* col = a_.col(j).data();
  for (std::size_t k = done - g_base_; k < g_log_.size(); ++k) {
    const Vec& g = g_log_[k];
    const double b = g(j);
    for (Index i = 0; i < n_; ++i) col[i] += g(i) * b;
  }
  done = g_base_ + g_log_.size();
}

void SolverSession::catch_up_all() {
  for (Index j = 0; j < n_; ++j) catch_up(j);
}

LegContext SolverSession::leg_context() {
  LegContext ctx;
  ctx.a = &a_;
  ctx.counters = &counters_;
  ctx.policy = config_.policy;
  ctx.cycle_cap = config_.cycle_cap;
  ctx.ensure_column = [this](Index j) {
    catch_up(j);
    s_star_.insert(j);
  };
  ctx.on_event = [this](const PathEvent& e) {
    lambda_cur_ = e.param;
    s_max_cur_ = std::max(s_max_cur_, e.support_after.size());
    if (observer_) observer_(*this, e);
  };
  return ctx;
}

void SolverSession::run_matrix_leg(const Vec& g, Index& rebuilds) {
  LegCursor cursor;
  const LegContext ctx = leg_context();
  with_retry([&] { run_lambda_leg(ctx, g, c_, q_, par1_, par2_, cursor, events_); },
             [&] {
               rebuild_at(cursor.param);
               ++rebuilds;
               cursor.last_index = -1;
               cursor.events = 0;
             });
}

void SolverSession::run_vector_leg(Index& rebuilds) {
  LegCursor cursor;
  const LegContext ctx = leg_context();
  with_retry([&] { run_utilde_leg(ctx, q_, par1_, par3_, cursor, events_); },
             [&] {
               rebuild_at(cursor.param);
               ++rebuilds;
               cursor.last_index = -1;
               cursor.events = 0;
             });
}

void SolverSession::rebuild_at(double lambda) {
  lambda_cur_ = lambda;
  if (phase_ == Phase::matrix) {
    par1_ = init_par1(MatrixView(a_, *g_cur_, lambda), q_.support, config_.m_layout);
    par2_ = direct_update_par2(q_.support, par1_, c_, *g_cur_);
  } else {
    par1_ = init_par1(MatrixView(a_), q_.support, config_.m_layout);
    if (phase_ == Phase::vector) par3_ = direct_update_par3(q_.support, par1_, l_cur_);
  }
}

void SolverSession::rebuild() { rebuild_at(lambda_cur_); }

void SolverSession::refresh() {
  try {
    Quadruple q = solve_given_support(MatrixView(a_), c_, q_.support);
    if (sign_feasible(q) && kkt_residual(MatrixView(a_), c_, q) <= config_.tol) {
      q_ = std::move(q);
      par1_ = init_par1(MatrixView(a_), q_.support, config_.m_layout);
      return;
    }
  } catch (const SingularSubmatrix&) {
  }
  catch_up_all();
  q_ = oracle_solve(Problem(a_, c_, Problem::Check::none), config_.oracle);
  for (Index j : q_.support) s_star_.insert(j);
  par1_ = init_par1(MatrixView(a_), q_.support, config_.m_layout);
}

namespace {

/// KKT residual of q given w = A_{., S} x_S.
double residual_from(const Support& s, const Vec& w, const Vec& c, const Quadruple& q) {
  double res = 0.0;
  double sum = 0.0;
  for (Index i = 0; i < w.size(); ++i) {
    const double vi = q.v(i);
    if (s.contains(i)) {
      sum += vi;
      res = std::max(res, std::abs(w(i) - q.mu0 - c(i)));
      res = std::max(res, std::max(0.0, -vi));
    } else {
      res = std::max(res, std::abs(w(i) - q.mu0 - c(i) + vi));
      res = std::max(res, std::max(0.0, vi));  // v = -mu off the support
    }
  }
  return std::max(res, std::abs(sum - 1.0));
}

}  // namespace

double SolverSession::polish() {
  const Support& s = q_.support;
  Vec& v = q_.v;
  Vec w = Vec::Zero(n_);
  for (Index j : s) w.noalias() += v(j) * a_.col(j);
  const double before = residual_from(s, w, c_, q_);
  if (!config_.polish || before == 0.0) return before;
  double m_norm = 0.0;
  for (Index j : s) {
    const double* mj = par1_.m.col(j);
    double col = 0.0;
    for (Index i : s) col += std::abs(mj[i]);
    m_norm = std::max(m_norm, col);
  }
  if (std::max(1.0, m_norm) * before <= config_.polish_tol) return before;

  // Newton correction with M_SS standing in for A_SS^-1.
  const Index sz = s.size();
  Vec r(sz);
  Vec et(sz);
  double r0 = -1.0;
  for (Index k = 0; k < sz; ++k) {
    const Index i = s[static_cast<std::size_t>(k)];
    r(k) = w(i) - q_.mu0 - c_(i);
    et(k) = par1_.eta_tilde(i);
    r0 += v(i);
  }
  const double dmu = (et.dot(r) - r0) / par1_.d;
  Vec dx = dmu * et;
  for (Index k = 0; k < sz; ++k) {
    const double* mk = par1_.m.col(s[static_cast<std::size_t>(k)]);
    for (Index p = 0; p < sz; ++p) dx(p) -= mk[s[static_cast<std::size_t>(p)]] * r(k);
  }
  for (Index k = 0; k < sz; ++k) {
    const Index j = s[static_cast<std::size_t>(k)];
    v(j) += dx(k);
    w.noalias() += dx(k) * a_.col(j);
  }
  q_.mu0 += dmu;
  for (Index i = 0; i < n_; ++i)
    if (!s.contains(i)) v(i) = c_(i) + q_.mu0 - w(i);
  const auto sn = static_cast<std::uint64_t>(sz);
  counters_.add(Op::polish, sn * sn + static_cast<std::uint64_t>(n_) * sn + 2 * sn + 1);
  return residual_from(s, w, c_, q_);
}

StepReport SolverSession::step(const Vec& g, const Vec& c_new) {
  if (g.size() != n_ || c_new.size() != n_) throw DimensionMismatch("step inputs do not match n");
  const auto start = Clock::now();
  ++t_;
  counters_.reset();
  counters_.enabled = config_.counters;
  events_.clear();
  const Support prev = q_.support;
  s_max_cur_ = q_.support.size();
  Index rebuilds = 0;

  // Matrix leg on (A + lambda g g^T, c).
  phase_ = Phase::matrix;
  g_cur_ = &g;
  lambda_cur_ = 0.0;
  l_cur_ = c_new - c_;
  // A zero direction leaves the leg's path constant.
  const bool move_a = !g.isZero(0.0);
  if (move_a) {
    par2_ = direct_update_par2(q_.support, par1_, c_, g, &counters_, config_.policy);
    run_matrix_leg(g, rebuilds);
  }
  const auto k_a = static_cast<Index>(events_.size());

  // A <- A + g g^T on the tracked columns.
  const auto a_start = Clock::now();
  if (move_a) {
    std::vector<Index> cols;
    if (config_.lazy_a) {
      cols.assign(s_star_.begin(), s_star_.end());
    } else {
      cols.resize(static_cast<std::size_t>(n_));
      for (Index j = 0; j < n_; ++j) cols[static_cast<std::size_t>(j)] = j;
    }
    std::vector<double*> ptrs;
    std::vector<double> right;
    ptrs.reserve(cols.size());
    right.reserve(cols.size());
    for (Index j : cols) {
      catch_up(j);
      ptrs.push_back(a_.col(j).data());
      right.push_back(g(j));
    }
    kernels::rank1_columns(ptrs, g.data(), right, n_, config_.policy);
    g_log_.push_back(g);
    const std::size_t total = g_base_ + g_log_.size();
    for (Index j : cols) applied_[static_cast<std::size_t>(j)] = total;
    counters_.add(Op::a_update, static_cast<std::uint64_t>(n_) * cols.size());
    // Drop history no stale column still needs.
    const std::size_t need = *std::min_element(applied_.begin(), applied_.end());
    while (g_base_ < need && !g_log_.empty()) {
      g_log_.pop_front();
      ++g_base_;
    }
  }
  const std::int64_t a_ns = elapsed_ns(a_start);

  // Vector leg on (A + g g^T, c + lambda~ l).
  phase_ = Phase::vector;
  g_cur_ = nullptr;
  lambda_cur_ = 0.0;
  if (!l_cur_.isZero(0.0)) {
    par3_ = direct_update_par3(q_.support, par1_, l_cur_, &counters_, config_.policy);
    run_vector_leg(rebuilds);
  }
  const auto k_c = static_cast<Index>(events_.size()) - k_a;

  c_ = c_new;
  phase_ = Phase::idle;
  lambda_cur_ = 0.0;
  if (config_.rebuild_every > 0 && t_ % config_.rebuild_every == 0) {
    rebuild();
    ++rebuilds;
  }
  double residual = polish();
  if (!(residual <= config_.tol)) {
    refresh();
    ++rebuilds;
    residual = kkt_residual(MatrixView(a_), c_, q_);
  }

  StepReport r;
  r.t = t_;
  r.k_a = k_a;
  r.k_c = k_c;
  r.k_t = k_a + k_c;
  r.support_change = symmetric_difference_size(prev, q_.support);
  r.e_t = (r.k_t - r.support_change) / 2;
  r.support_size = q_.support.size();
  r.s_max = std::max(s_max_cur_, r.support_size);
  r.s_star = s_star_.size();
  r.kkt_residual = residual;
  r.a_update_ns = a_ns;
  r.wall_ns = elapsed_ns(start) - a_ns;
  r.mult_count = counters_.total();
  r.maintenance_mults = counters_[Op::polish];
  r.mult_bound = complexity_bound(n_, r.s_max, r.s_star, r.k_a, r.k_c);
  r.rebuilds = rebuilds;
  return r;
}

double SolverSession::validate() const {
  switch (phase_) {
    case Phase::matrix: {
      const MatrixView view(a_, *g_cur_, lambda_cur_);
      const Par2Check p2{par2_, c_, *g_cur_};
      return validate_state(view, q_.support, par1_, &p2);
    }
    case Phase::vector: {
      const Par3Check p3{par3_, l_cur_};
      return validate_state(MatrixView(a_), q_.support, par1_, nullptr, &p3);
    }
    case Phase::idle: break;
  }
  return validate_state(MatrixView(a_), q_.support, par1_);
}

double SolverSession::kappa() const {
  if (phase_ == Phase::matrix) return kappa_estimate(MatrixView(a_, *g_cur_, lambda_cur_), q_.support, par1_);
  return kappa_estimate(MatrixView(a_), q_.support, par1_);
}

namespace {
constexpr char kCheckpointMagic[8] = {'H', 'O', 'N', 'E', 'S', 'C', 'K', 'P'};
constexpr std::uint32_t kCheckpointVersion = 1;
}  // namespace

void SolverSession::save(std::ostream& out) const {
  using namespace binio;
  if (phase_ != Phase::idle) throw Error("checkpoint only between steps");
  out.write(kCheckpointMagic, 8);
  put_u32(out, kCheckpointVersion);
  put_u64(out, static_cast<std::uint64_t>(n_));
  put_u64(out, static_cast<std::uint64_t>(t_));
  for (Index j = 0; j < n_; ++j)
    for (Index i = 0; i < n_; ++i) put_f64(out, a_(i, j));
  put_vec(out, c_);
  put_u64(out, static_cast<std::uint64_t>(s_star_.size()));
  for (Index j : s_star_) put_u64(out, static_cast<std::uint64_t>(j));
  for (std::size_t done : applied_) put_u64(out, done);
  put_u64(out, g_base_);
  put_u64(out, g_log_.size());
  for (const Vec& g : g_log_) put_vec(out, g);
  write_snapshot(out, StateSnapshot{q_, par1_, par2_, par3_});
}

SolverSession SolverSession::load(std::istream& in, SolverConfig config) {
  using namespace binio;
  char magic[8];
  in.read(magic, 8);
  if (in.gcount() != 8 || std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw ParseError("not a session checkpoint", 0, 0);
  if (get_u32(in) != kCheckpointVersion) throw ParseError("unsupported checkpoint version", 0, 0);
  SolverSession s;
  s.config_ = std::move(config);
  s.n_ = static_cast<Index>(get_u64(in));
  if (s.n_ < 1 || s.n_ > (Index{1} << 20)) throw ParseError("implausible dimension", 0, 0);
  s.t_ = static_cast<Index>(get_u64(in));
  s.a_.resize(s.n_, s.n_);
  for (Index j = 0; j < s.n_; ++j)
    for (Index i = 0; i < s.n_; ++i) s.a_(i, j) = get_f64(in);
  s.c_ = get_vec(in, s.n_);
  const auto k = static_cast<Index>(get_u64(in));
  std::vector<Index> star;
  for (Index b = 0; b < k; ++b) star.push_back(static_cast<Index>(get_u64(in)));
  s.s_star_ = Support(s.n_, star);
  s.applied_.resize(static_cast<std::size_t>(s.n_));
  for (auto& done : s.applied_) done = get_u64(in);
  s.g_base_ = get_u64(in);
  const auto logs = get_u64(in);
  for (std::uint64_t b = 0; b < logs; ++b) s.g_log_.push_back(get_vec(in, s.n_));
  StateSnapshot snap = read_snapshot(in);
  if (snap.quadruple.dim() != s.n_) throw ParseError("snapshot dimension mismatch", 0, 0);
  s.q_ = std::move(snap.quadruple);
  s.par1_ = std::move(snap.par1);
  s.par2_ = std::move(snap.par2);
  s.par3_ = std::move(snap.par3);
  s.counters_.enabled = s.config_.counters;
  return s;
}

std::vector<SequenceEntry> run_sequence(SequentialSolver& solver, Flow& flow, Index steps) {
  std::vector<SequenceEntry> out;
  out.reserve(static_cast<std::size_t>(std::max<Index>(steps, 0)));
  Vec x = solver.x();
  for (Index t = 0; t < steps; ++t) {
    const FlowStep st = flow.next(x);
    StepReport report = solver.step(st.g, st.c);
    x = solver.x();
    out.push_back(SequenceEntry{x, report});
  }
  return out;
}

}  // namespace hones
