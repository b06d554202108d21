// OpenMP kernels against their serial references.

#include <benchmark/benchmark.h>

#include "corrsense/experiments.hpp"
#include "corrsense/geometry.hpp"
#include "corrsense/instance.hpp"

using namespace corrsense;

namespace {

void BM_McComplexity(benchmark::State& state) {
  const StructureSpec st = Sparse{1000, 100};
  for (auto _ : state) benchmark::DoNotOptimize(mc_complexity(st, 1, 2000, 2));
}
void BM_McComplexitySerial(benchmark::State& state) {
  const StructureSpec st = Sparse{1000, 100};
  for (auto _ : state) benchmark::DoNotOptimize(reference::mc_complexity(st, 1, 2000, 2));
}

PhaseGridSpec grid() {
  PhaseGridSpec spec;
  spec.experiment = Experiment::binary_sparse_constrained;
  spec.p = 100;
  spec.n_values = {100, 150};
  spec.s_cor_values = {5, 20};
  spec.reps = 4;
  spec.seed = 3;
  return spec;
}

void BM_PhaseGrid(benchmark::State& state) {
  auto spec = grid();
  spec.threads = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_phase_grid(spec));
}
void BM_PhaseGridSerial(benchmark::State& state) {
  const auto spec = grid();
  for (auto _ : state) benchmark::DoNotOptimize(reference::run_phase_grid(spec));
}

void BM_GaussianMatrix(benchmark::State& state) {
  const auto n = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(gen_gaussian_matrix(n, n, Seed(5)));
}
void BM_GaussianMatrixSerial(benchmark::State& state) {
  const auto n = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(reference::gen_gaussian_matrix(n, n, Seed(5)));
}

}  // namespace

BENCHMARK(BM_McComplexity)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_McComplexitySerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_PhaseGrid)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_PhaseGridSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_GaussianMatrix)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_GaussianMatrixSerial)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
