#include "hones/kernels.hpp"

#include <algorithm>

#ifdef HONES_HAVE_OPENMP
#include <omp.h>
#endif

namespace hones::kernels {

bool openmp_enabled() {
#ifdef HONES_HAVE_OPENMP
  return true;
#else
  return false;
#endif
}

int max_threads() {
#ifdef HONES_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace serial {

void combine_columns(std::span<const double* const> cols, std::span<const double> coeff,
                     double* out, Index n) {
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const double a = coeff[k];
    const double* col = cols[k];
    for (Index i = 0; i < n; ++i) out[i] += a * col[i];
  }
}

void rank1_columns(std::span<double* const> cols, const double* left,
                   std::span<const double> right, Index n) {
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const double b = right[k];
    double* col = cols[k];
    for (Index i = 0; i < n; ++i) col[i] += left[i] * b;
  }
}

}  // namespace serial

namespace parallel {

namespace {
constexpr Index kRowBlock = 256;
}

void combine_columns(std::span<const double* const> cols, std::span<const double> coeff,
                     double* out, Index n, int threads) {
#ifdef HONES_HAVE_OPENMP
  const Index blocks = (n + kRowBlock - 1) / kRowBlock;
  const int nt = threads > 0 ? threads : omp_get_max_threads();
  // Row blocks are independent; within a block the k-loop matches the serial
  // order for every element.
#pragma omp parallel for schedule(static) num_threads(nt)
  for (Index b = 0; b < blocks; ++b) {
    const Index lo = b * kRowBlock;
    const Index hi = std::min(n, lo + kRowBlock);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const double a = coeff[k];
      const double* col = cols[k];
      for (Index i = lo; i < hi; ++i) out[i] += a * col[i];
    }
  }
#else
  (void)threads;
  serial::combine_columns(cols, coeff, out, n);
#endif
}

void rank1_columns(std::span<double* const> cols, const double* left,
                   std::span<const double> right, Index n, int threads) {
#ifdef HONES_HAVE_OPENMP
  const auto ncols = static_cast<std::int64_t>(cols.size());
  const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(nt)
  for (std::int64_t k = 0; k < ncols; ++k) {
    const double b = right[static_cast<std::size_t>(k)];
    double* col = cols[static_cast<std::size_t>(k)];
    for (Index i = 0; i < n; ++i) col[i] += left[i] * b;
  }
#else
  (void)threads;
  serial::rank1_columns(cols, left, right, n);
#endif
}

}  // namespace parallel

void combine_columns(std::span<const double* const> cols, std::span<const double> coeff,
                     double* out, Index n, const ExecPolicy& policy) {
  if (policy.use_parallel(n * static_cast<Index>(cols.size())))
    parallel::combine_columns(cols, coeff, out, n, policy.threads);
  else
    serial::combine_columns(cols, coeff, out, n);
}

void rank1_columns(std::span<double* const> cols, const double* left,
                   std::span<const double> right, Index n, const ExecPolicy& policy) {
  if (policy.use_parallel(n * static_cast<Index>(cols.size())))
    parallel::rank1_columns(cols, left, right, n, policy.threads);
  else
    serial::rank1_columns(cols, left, right, n);
}

}  // namespace hones::kernels
