#include <benchmark/benchmark.h>

#include <vector>

#include "sklab/amp.hpp"
#include "sklab/cavity.hpp"
#include "sklab/disorder.hpp"
#include "sklab/function_seq.hpp"
#include "sklab/gibbs.hpp"
#include "sklab/scalar.hpp"

namespace {

using namespace sklab;

std::vector<double> flat_u0(std::size_t n) { return std::vector<double>(n, 0.5); }

void BM_GammaMap(benchmark::State& state) {
  const ModelParams p{1.0, 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(gamma_map(0.4, 0.3, 0.3, p));
}
BENCHMARK(BM_GammaMap);

void BM_SolveQ(benchmark::State& state) {
  const ModelParams p{1.0, 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(solve_q(p).q);
}
BENCHMARK(BM_SolveQ);

void BM_Amp(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const DisorderMatrix a = sample_matrix(n, 1);
  const auto u0 = flat_u0(n);
  const FunctionSeq fs = tanh_seq(1.0, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(amp_run(a, u0, fs, 5));
}
BENCHMARK(BM_Amp)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

// Depth 3 with generic tanh stores one dense level over subsets of size 1.
void BM_CavityDepth3(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const DisorderMatrix a = sample_matrix(n, 1);
  const auto u0 = flat_u0(n);
  const FunctionSeq fs = tanh_seq(1.0, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(cavity_run(a, u0, fs, 3));
}
BENCHMARK(BM_CavityDepth3)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_CavityDepth4(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const DisorderMatrix a = sample_matrix(n, 1);
  const auto u0 = flat_u0(n);
  const FunctionSeq fs = tanh_seq(1.0, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(cavity_run(a, u0, fs, 4));
}
BENCHMARK(BM_CavityDepth4)->Arg(30)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_ExactGibbs(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const DisorderMatrix a = sample_matrix(n, 1);
  const ModelParams p{1.0, 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(exact_gibbs(a, p, {}));
}
BENCHMARK(BM_ExactGibbs)->DenseRange(12, 20, 4)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
