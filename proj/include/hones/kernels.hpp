#pragma once

// Dense column kernels behind every O(n*s) update of the path solver.
//
// Each kernel has a serial reference implementation and an OpenMP variant.
// The OpenMP variants partition over output elements only and keep the
// per-element summation order of the serial loop, so both produce
// bitwise-identical results.

#include <span>

#include "hones/types.hpp"

namespace hones::kernels {

struct ExecPolicy {
  bool parallel = true;
  /// Problems with fewer multiply-adds than this run the serial path.
  Index min_parallel_work = Index{1} << 17;
  /// 0 keeps the OpenMP default.
  int threads = 0;

  bool use_parallel(Index work) const { return parallel && work >= min_parallel_work; }
  static ExecPolicy serial_only() { return ExecPolicy{false, 0, 0}; }
};

/// Whether the library was built with OpenMP.
bool openmp_enabled();
int max_threads();

namespace serial {

/// out[i] += sum_k coeff[k] * cols[k][i], k in order.
void combine_columns(std::span<const double* const> cols, std::span<const double> coeff,
                     double* out, Index n);

/// cols[k][i] += left[i] * right[k].
void rank1_columns(std::span<double* const> cols, const double* left,
                   std::span<const double> right, Index n);

}  // namespace serial

namespace parallel {

void combine_columns(std::span<const double* const> cols, std::span<const double> coeff,
                     double* out, Index n, int threads);

void rank1_columns(std::span<double* const> cols, const double* left,
                   std::span<const double> right, Index n, int threads);

}  // namespace parallel

void combine_columns(std::span<const double* const> cols, std::span<const double> coeff,
                     double* out, Index n, const ExecPolicy& policy);

void rank1_columns(std::span<double* const> cols, const double* left,
                   std::span<const double> right, Index n, const ExecPolicy& policy);

}  // namespace hones::kernels
