// Copyright 2026 The VisionGRU Authors. Apache 2.0 License.

#include <benchmark/benchmark.h>

#include "vgru/scan.hpp"
#include "vgru/verify.hpp"

namespace {

using namespace vgru;

ScanPair<float> make_pairs(std::size_t steps, std::size_t lanes) {
  Rng rng = stream(1, "bench.pairs", steps);
  return random_scan_pair<float>(steps, lanes, rng);
}

void BM_ScanSequential(benchmark::State& state) {
  const auto steps = std::size_t(state.range(0));
  ScanPair<float> p = make_pairs(steps, 64);
  for (auto _ : state) {
    Tensor<float> h = scan_sequential(p);
    benchmark::DoNotOptimize(h.data());
  }
  state.SetItemsProcessed(int64_t(state.iterations()) * int64_t(steps) * 64);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ScanSequential)->RangeMultiplier(4)->Range(256, 65536)->Complexity();

void BM_ScanParallel(benchmark::State& state) {
  const auto steps = std::size_t(state.range(0));
  ScanPair<float> p = make_pairs(steps, 64);
  for (auto _ : state) {
    Tensor<float> h = scan_parallel(p);
    benchmark::DoNotOptimize(h.data());
  }
  state.SetItemsProcessed(int64_t(state.iterations()) * int64_t(steps) * 64);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ScanParallel)->RangeMultiplier(4)->Range(256, 65536)->Complexity();

}  // namespace

BENCHMARK_MAIN();
