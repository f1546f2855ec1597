#include <benchmark/benchmark.h>

#include "cw/trees.hpp"

static void BM_enum_cet(benchmark::State& state) {
  for (auto _ : state) {
    auto trees = cw::enum_cet((int)state.range(0));
    benchmark::DoNotOptimize(trees);
  }
}
BENCHMARK(BM_enum_cet)->Arg(8)->Arg(12)->Arg(16);

static void BM_tree_differential(benchmark::State& state) {
  auto trees = cw::enum_cet((int)state.range(0));
  for (auto _ : state) {
    for (auto& t : trees) {
      auto terms = cw::expand_tree_differential(t);
      benchmark::DoNotOptimize(terms);
    }
  }
}
BENCHMARK(BM_tree_differential)->Arg(8)->Arg(12);

BENCHMARK_MAIN();
