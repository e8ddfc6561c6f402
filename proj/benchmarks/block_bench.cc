// Copyright 2026 The VisionGRU Authors. Apache 2.0 License.

#include <benchmark/benchmark.h>

#include "vgru/backbone.hpp"
#include "vgru/verify.hpp"

namespace {

using namespace vgru;

void BM_BlockForward(benchmark::State& state) {
  const auto side = std::size_t(state.range(0));
  const auto channels = std::size_t(state.range(1));
  Rng rng = stream(2, "bench.block");
  TwoDGRUBlock<float> blk = random_block<float>(channels, rng);
  Tensor<float> x({1, side, side, channels});
  for (std::size_t i = 0; i < x.numel(); ++i) x[i] = float(rng.uniform(-1, 1));
  for (auto _ : state) {
    Tensor<float> y = block_forward(blk, x);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(int64_t(state.iterations()) *
                          int64_t(side * side * channels));
}
BENCHMARK(BM_BlockForward)
    ->Args({16, 64})
    ->Args({32, 64})
    ->Args({56, 112})
    ->Args({64, 64});

void BM_MiniBackboneForward(benchmark::State& state) {
  ModelSpec spec;
  spec.variant = "mini";
  spec.base_width = 32;
  spec.depths = {2, 2, 8, 2};
  spec.res_h = spec.res_w = 64;
  spec.num_classes = 10;
  Backbone<float> model(spec);
  model.init(3);
  Rng rng = stream(3, "bench.backbone");
  Tensor<float> img({1, 64, 64, 3});
  for (std::size_t i = 0; i < img.numel(); ++i) img[i] = float(rng.uniform(-1, 1));
  for (auto _ : state) {
    Tensor<float> y = model.forward(img);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_MiniBackboneForward);

}  // namespace

BENCHMARK_MAIN();
