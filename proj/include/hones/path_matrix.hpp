#pragma once

// Matrix leg: follow the optimum of the problem with A + lambda g g^T for
// lambda in [0, 1], keeping (quadruple, Par1, Par2) exact at every lambda.
//
// With alpha(lambda) = lambda / (1 + lambda D_gg) and
// u = (D_g mu0 - D_gc)(D_g eta~ - D eta):
//   v(lambda)   = v + alpha / (D - alpha D_g^2) * u
//   mu0(lambda) = mu0 + alpha / (D - alpha D_g^2) * D_g (D_g mu0 - D_gc)

#include "hones/path_common.hpp"

namespace hones {

/// Next turning point from the current reference lambda. `skip` is the index
/// toggled by the previous event; it is never reported as an immediate hit.
/// Fills scratch.u.
FindResult find_lambda(const Quadruple& q, const Par1& par1, const Par2& par2,
                       PathScratch& scratch, Index skip = -1, Counters* counters = nullptr);

/// Advances (quadruple, Par1, Par2) by `inc` using scratch.u from the last
/// find_lambda call. Throws DegenerateDenominator when D - alpha D_g^2
/// collapses.
void update_by_lambda(double inc, Quadruple& q, Par1& par1, Par2& par2,
                      const PathScratch& scratch, Counters* counters = nullptr,
                      const kernels::ExecPolicy& policy = {});

/// Convenience overload that recomputes u first.
void update_by_lambda(double inc, Quadruple& q, Par1& par1, Par2& par2);

/// Adds j to the support at cumulative `lambda`; `a` is the base matrix
/// (without lambda g g^T). Column j of `a` must be current.
void expand_support_lambda(double lambda, Support& s, Index j, const Mat& a, const Vec& c,
                           const Vec& g, Par1& par1, Par2& par2, PathScratch& scratch,
                           Counters* counters = nullptr, const kernels::ExecPolicy& policy = {});

/// Removes j from the support.
void shrink_support_lambda(Support& s, Index j, const Vec& c, Par1& par1, Par2& par2,
                           PathScratch& scratch, Counters* counters = nullptr,
                           const kernels::ExecPolicy& policy = {});

/// Runs (or resumes, from cursor.param) the leg up to lambda = 1. Events are
/// appended to `events`. Throws CycleLimit past the cap and Degenerate*
/// on numerical breakdown; the cursor then marks the position reached.
void run_lambda_leg(const LegContext& ctx, const Vec& g, const Vec& c, Quadruple& q, Par1& par1,
                    Par2& par2, LegCursor& cursor, std::vector<PathEvent>& events);

}  // namespace hones
