#pragma once

// Pieces shared by the two legs of the path: event records, leg context,
// and the support expand / shrink updates of Par1.

#include <functional>
#include <vector>

#include "hones/counters.hpp"
#include "hones/kernels.hpp"
#include "hones/kkt.hpp"
#include "hones/state.hpp"

namespace hones {

enum class Leg : std::uint8_t { matrix, vector };
enum class EventKind : std::uint8_t { enter, leave };

struct PathEvent {
  Leg leg = Leg::matrix;
  /// Leg parameter (lambda or lambda~) at the turning point.
  double param = 0.0;
  Index index = -1;
  EventKind kind = EventKind::enter;
  Support support_after;
};

/// Working vectors reused across events. `u` is the matrix-leg direction
/// (D_g mu0 - D_gc)(D_g eta~ - D eta), `d` the vector-leg direction
/// xi - (D_l / D) eta~.
struct PathScratch {
  Vec u;
  Vec d;
  Vec gamma;
  Vec beta;
  std::vector<double> row;
  std::vector<double> right;
  double alpha = 0.0;
  double a_tilde_jj = 0.0;
  double b_js = 0.0;
  double b_tilde_js = 0.0;
};
using LambdaLegScratch = PathScratch;

struct FindResult {
  /// Raw parameter increment to the next turning point; kInf when none.
  double inc = kInf;
  Index index = -1;
  /// True when `index` would enter the support.
  bool enter = false;
};

using ColumnHook = std::function<void(Index)>;
using EventHook = std::function<void(const PathEvent&)>;

struct LegContext {
  /// Base matrix. Columns of the support must be current; `ensure_column`
  /// is called before any other column is read.
  const Mat* a = nullptr;
  ColumnHook ensure_column;
  EventHook on_event;
  Counters* counters = nullptr;
  kernels::ExecPolicy policy;
  /// Events allowed per leg attempt; 0 means 10 n.
  Index cycle_cap = 0;
};

/// Resumable position inside a leg.
struct LegCursor {
  double param = 0.0;
  Index last_index = -1;
  Index events = 0;
};

namespace detail {

/// Coordinates whose magnitude is at most this count as zero.
double zero_tolerance(const Vec& v);

/// Row j of M restricted to the columns of `s` (M_{jS}).
void gather_row(const Par1& par1, const Support& s, Index j, std::vector<double>& out);

/// Schur complement A_jj + M_jS A_Sj of the base matrix (no lambda term).
double schur_base(const Mat& a, const Support& s, Index j, const std::vector<double>& m_js);

/// gamma_{S~^c} = -A_{.j} - A_{.S} M_jS^T - extra * g; gamma_S = M_jS^T;
/// gamma_j = 1. `g` may be null when extra is zero.
void build_gamma(const Mat& a, const Support& s, Index j, const std::vector<double>& m_js,
                 const Vec* g, double extra, Vec& gamma, const kernels::ExecPolicy& policy);

/// M <- R_j(M) + gamma gamma~^T / A~_jj, eta~ and D likewise; inserts j.
void expand_par1(Support& s, Index j, const Vec& gamma, double inv_pivot,
                 const std::vector<double>& m_js, Par1& par1, std::vector<double>& right,
                 const kernels::ExecPolicy& policy);

/// beta = M_{.j} with beta_j = -1. Returns M_jj; throws DegeneratePivot.
double shrink_pivot(const Support& s, Index j, const Par1& par1, Vec& beta);

/// M <- R_j(M) - beta beta~^T / M_jj with column j dropped; eta~, D
/// likewise; erases j.
void shrink_par1(Support& s, Index j, const Vec& beta, double m_jj, Par1& par1,
                 std::vector<double>& right, const kernels::ExecPolicy& policy);

/// v <- R_j(v) + coef * w.
void reflect_add(Vec& v, Index j, double coef, const Vec& w);

Index resolve_cap(Index cap, Index n);

}  // namespace detail

}  // namespace hones
