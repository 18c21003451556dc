// Serial reference vs OpenMP column kernels, plus one solver step.
// Arguments are (n, number of columns).

#include <benchmark/benchmark.h>

#include <vector>

#include "hones/driver.hpp"
#include "hones/flows.hpp"
#include "hones/kernels.hpp"

using namespace hones;

namespace {

struct Columns {
  Mat data;
  Vec coeff;
  Vec left;
  std::vector<const double*> cptr;
  std::vector<double*> ptr;

  Columns(Index n, Index k) : data(Rng(1).normal_vec(n * k).reshaped(n, k)), coeff(Rng(2).normal_vec(k)),
                              left(Rng(3).normal_vec(n)) {
    for (Index j = 0; j < k; ++j) {
      cptr.push_back(data.col(j).data());
      ptr.push_back(data.col(j).data());
    }
  }
  std::span<const double> c() const { return {coeff.data(), static_cast<std::size_t>(coeff.size())}; }
};

void BM_combine_serial(benchmark::State& state) {
  const Index n = state.range(0);
  Columns cols(n, state.range(1));
  Vec out = Vec::Zero(n);
  for (auto _ : state) {
    kernels::serial::combine_columns(cols.cptr, cols.c(), out.data(), n);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * n * state.range(1));
}

void BM_combine_parallel(benchmark::State& state) {
  const Index n = state.range(0);
  Columns cols(n, state.range(1));
  Vec out = Vec::Zero(n);
  for (auto _ : state) {
    kernels::parallel::combine_columns(cols.cptr, cols.c(), out.data(), n, 0);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * n * state.range(1));
}

void BM_rank1_serial(benchmark::State& state) {
  const Index n = state.range(0);
  Columns cols(n, state.range(1));
  for (auto _ : state) {
    kernels::serial::rank1_columns(cols.ptr, cols.left.data(), cols.c(), n);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * n * state.range(1));
}

void BM_rank1_parallel(benchmark::State& state) {
  const Index n = state.range(0);
  Columns cols(n, state.range(1));
  for (auto _ : state) {
    kernels::parallel::rank1_columns(cols.ptr, cols.left.data(), cols.c(), n, 0);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * n * state.range(1));
}

// Steady-state step of the path solver on the synthetic flow.
void BM_session_step(benchmark::State& state) {
  FlowConfig fc;
  fc.n = state.range(0);
  fc.seed = 1;
  SolverConfig cfg;
  cfg.policy.parallel = state.range(1) != 0;
  cfg.policy.min_parallel_work = 0;
  auto flow = make_flow(fc);
  SolverSession session(flow->initial_matrix(), flow->initial_c(), cfg);
  run_sequence(session, *flow, 200);
  Vec x = session.x();
  for (auto _ : state) {
    const FlowStep st = flow->next(x);
    session.step(st.g, st.c);
    x = session.x();
  }
  state.SetLabel(state.range(1) != 0 ? "openmp" : "serial");
}

void kernel_args(benchmark::internal::Benchmark* b) {
  for (long n : {1000, 10000})
    for (long k : {16, 128}) b->Args({n, k});
}

}  // namespace

BENCHMARK(BM_combine_serial)->Apply(kernel_args);
BENCHMARK(BM_combine_parallel)->Apply(kernel_args);
BENCHMARK(BM_rank1_serial)->Apply(kernel_args);
BENCHMARK(BM_rank1_parallel)->Apply(kernel_args);
BENCHMARK(BM_session_step)->Args({1000, 0})->Args({1000, 1});

BENCHMARK_MAIN();
