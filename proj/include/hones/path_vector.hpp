#pragma once

// Vector leg: follow the optimum of the problem with c + lambda~ l for
// lambda~ in [0, 1]. Between turning points the path is affine:
//   v(lambda~)   = v - (xi - (D_l / D) eta~) lambda~
//   mu0(lambda~) = mu0 + (D_l / D) lambda~
// and Par1 / Par3 change only at turning points.

#include "hones/path_common.hpp"

namespace hones {

/// Fills scratch.d with the direction xi - (D_l / D) eta~.
FindResult find_utilde_lambda(const Quadruple& q, const Par1& par1, const Par3& par3,
                              PathScratch& scratch, Index skip = -1, Counters* counters = nullptr);

/// Uses scratch.d from the last find_utilde_lambda call.
void update_by_utilde_lambda(double inc, Quadruple& q, const Par1& par1, const Par3& par3,
                             const PathScratch& scratch, Counters* counters = nullptr);
void update_by_utilde_lambda(double inc, Quadruple& q, const Par1& par1, const Par3& par3);

/// Adds j to the support; `a` is the (fixed) matrix of this leg.
void expand_support_utilde(Support& s, Index j, const Mat& a, Par1& par1, Par3& par3,
                           PathScratch& scratch, Counters* counters = nullptr,
                           const kernels::ExecPolicy& policy = {});

void shrink_support_utilde(Support& s, Index j, Par1& par1, Par3& par3, PathScratch& scratch,
                           Counters* counters = nullptr, const kernels::ExecPolicy& policy = {});

void run_utilde_leg(const LegContext& ctx, Quadruple& q, Par1& par1, Par3& par3, LegCursor& cursor,
                    std::vector<PathEvent>& events);

}  // namespace hones
