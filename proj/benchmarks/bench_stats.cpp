#include <benchmark/benchmark.h>

#include <vector>

#include "dialectqe/rng.hpp"
#include "dialectqe/stats.hpp"

using namespace dialectqe;

static void BM_Pearson(benchmark::State& state) {
  SplitMix64 rng(1);
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = rng.next_double();
    y[i] = rng.next_double();
  }
  for (auto _ : state) benchmark::DoNotOptimize(stats::pearson(x, y));
}
BENCHMARK(BM_Pearson)->Arg(300)->Arg(10000);

static void BM_Spearman(benchmark::State& state) {
  SplitMix64 rng(2);
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = rng.next_below(100);  // ties on purpose
    y[i] = rng.next_double();
  }
  for (auto _ : state) benchmark::DoNotOptimize(stats::spearman(x, y));
}
BENCHMARK(BM_Spearman)->Arg(300)->Arg(10000);

BENCHMARK_MAIN();
