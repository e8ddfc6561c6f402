// Copyright 2026 The VisionGRU Authors. Apache 2.0 License.

#include <doctest.h>

#include "support.hpp"
#include "vgru/flops.hpp"
#include "vgru/nn.hpp"
#include "vgru/optim.hpp"

using namespace vgru;
using namespace vgru_test;

TEST_SUITE_BEGIN("backbone");

namespace {

ModelSpec mini_spec(std::size_t d = 16, std::size_t res = 64,
                    std::array<std::size_t, 4> depths = {1, 1, 1, 1},
                    std::size_t classes = 10) {
  ModelSpec s;
  s.variant = "mini";
  s.base_width = d;
  s.res_h = s.res_w = res;
  s.depths = depths;
  s.num_classes = classes;
  return s;
}

}  // namespace

TEST_CASE("stage grids follow H/4, H/8, H/16, H/32") {
  for (std::size_t res : {64ul, 224ul}) {
    ModelSpec spec = mini_spec(8, res);
    Backbone<double> model(spec);
    model.init(1);
    Tensor<double> img({1, res, res, 3});
    ForwardResult<double> r = model.forward_features(img);
    for (std::size_t s = 0; s < 4; ++s) {
      const std::size_t side = res / (4ull << s);
      CHECK(r.stage_features[s].extent(1) == side);
      CHECK(r.stage_features[s].extent(2) == side);
    }
    CHECK(r.stage_features[0].extent(3) == 8);
    CHECK(r.stage_features[3].extent(3) == 32);  // final width 4D
    CHECK(r.logits.extent(1) == 10);
  }
}

TEST_CASE("misaligned resolutions are rejected with the alignment stated") {
  ModelSpec spec = mini_spec(8, 64);
  Backbone<double> model(spec);
  model.init(1);
  Tensor<double> img({1, 48, 48, 3});
  CHECK_THROWS_WITH_AS(model.forward(img), doctest::Contains("32"),
                       std::invalid_argument);
}

TEST_CASE("merge_2x2 concatenates exactly the four children") {
  Tensor<double> x({1, 4, 4, 1});
  for (std::size_t i = 0; i < 16; ++i) x[i] = double(i);
  Tensor<double> y = merge_2x2(x);
  CHECK(y.extent(3) == 4);
  // output (0,0) sees inputs (0,0),(0,1),(1,0),(1,1) = 0,1,4,5
  CHECK(y.at({0, 0, 0, 0}) == 0);
  CHECK(y.at({0, 0, 0, 1}) == 1);
  CHECK(y.at({0, 0, 0, 2}) == 4);
  CHECK(y.at({0, 0, 0, 3}) == 5);
  // output (1,1) sees 10,11,14,15
  CHECK(y.at({0, 1, 1, 0}) == 10);
  CHECK(y.at({0, 1, 1, 3}) == 15);

  Tensor<double> odd({1, 3, 4, 1});
  CHECK_THROWS_AS(merge_2x2(odd), std::invalid_argument);
}

TEST_CASE("untrained model: finite logits, loss near ln(num_classes)") {
  ModelSpec spec = mini_spec(16, 64);
  Backbone<double> model(spec);
  model.init(3);
  Rng rng = stream(100, "bb.init");
  Tensor<double> img = random_tensor<double>({4, 64, 64, 3}, rng);
  Tensor<double> logits = model.forward(img);
  for (std::size_t i = 0; i < logits.numel(); ++i)
    CHECK(std::isfinite(logits[i]));
  std::vector<int> labels{1, 4, 7, 2};
  const double loss = softmax_xent(logits, labels, 0.0);
  CHECK(loss == doctest::Approx(std::log(10.0)).epsilon(0.15));
}

TEST_CASE("batch permutation equivariance is exact") {
  ModelSpec spec = mini_spec(8, 32, {1, 1, 0, 0}, 6);
  Backbone<double> model(spec);
  model.init(5);
  Rng rng = stream(101, "bb.perm");
  Tensor<double> img = random_tensor<double>({3, 32, 32, 3}, rng);
  std::vector<std::size_t> perm{2, 0, 1};
  Tensor<double> img_p({3, 32, 32, 3});
  const std::size_t stride = 32 * 32 * 3;
  for (std::size_t b = 0; b < 3; ++b)
    for (std::size_t i = 0; i < stride; ++i)
      img_p[b * stride + i] = img[perm[b] * stride + i];
  Tensor<double> l = model.forward(img);
  Tensor<double> lp = model.forward(img_p);
  for (std::size_t b = 0; b < 3; ++b)
    for (std::size_t k = 0; k < 6; ++k)
      CHECK(lp.at({b, k}) == l.at({perm[b], k}));
}

TEST_CASE("count_params matches the instantiated parameter list") {
  for (auto spec :
       {mini_spec(8, 32, {1, 1, 0, 0}, 5), mini_spec(16, 64, {2, 1, 3, 1}, 10),
        mini_spec(32, 64, {2, 2, 8, 2}, 10)}) {
    Backbone<double> model(spec);
    std::size_t total = 0;
    for (auto* p : model.params()) total += p->numel();
    CHECK(count_params(spec) == total);
  }
}

TEST_CASE("preset parameter budgets sit inside the published windows") {
  const std::size_t tiny = count_params(ModelSpec::preset("tiny"));
  CHECK(tiny >= 25'500'000);
  CHECK(tiny <= 34'500'000);
  const std::size_t base = count_params(ModelSpec::preset("base"));
  CHECK(base >= 73'100'000);
  CHECK(base <= 98'900'000);
}

TEST_CASE("width calibration picks the closest sweep point") {
  auto cal = calibrate_width(ModelSpec::preset("tiny"), 30'000'000);
  CHECK(cal.width == 112);
  long long best = -1;
  for (auto& [d, n] : cal.sweep) {
    const long long dist = std::llabs((long long)n - 30'000'000ll);
    if (best < 0 || dist < best) best = dist;
  }
  CHECK(std::llabs((long long)cal.params - 30'000'000ll) == best);
}

TEST_CASE("flops scale linearly in token count") {
  const ModelSpec tiny = ModelSpec::preset("tiny");
  const double f224 = count_flops(tiny, 224).total_with_head;
  const double f448 = count_flops(tiny, 448).total_with_head;
  const double ratio = f448 / f224;
  CHECK(ratio >= 3.6);
  CHECK(ratio <= 4.4);

  // r^2-normalized cost is flat within 10% (head excluded)
  std::vector<double> norm;
  for (std::size_t r : {224ul, 448ul, 896ul})
    norm.push_back(count_flops(tiny, r).total_without_head / double(r * r));
  const double lo = *std::min_element(norm.begin(), norm.end());
  const double hi = *std::max_element(norm.begin(), norm.end());
  CHECK(hi / lo <= 1.10);
}

TEST_CASE("attention baseline reproduces the cited DeiT-S figures") {
  const double g224 = baseline_attention_flops(384, 12, 16, 224);
  CHECK(g224 / 1e9 == doctest::Approx(4.6).epsilon(0.05));
  const double g1248 = baseline_attention_flops(384, 12, 16, 1248);
  CHECK(g1248 / 432.3e9 <= 1.5);
  CHECK(432.3e9 / g1248 <= 1.5);
}

TEST_CASE("doubling resolution multiplies the attention term by 16") {
  const double d = 384, depth = 1;
  auto attn_only = [&](double res) {
    const double n = (res / 16) * (res / 16);
    return 2 * n * n * d * depth;
  };
  CHECK(attn_only(448) / attn_only(224) == doctest::Approx(16.0));
}

TEST_CASE("quadratic baseline overtakes: ratio grows with resolution") {
  const ModelSpec tiny = ModelSpec::preset("tiny");
  double prev = 0;
  for (std::size_t r : {224ul, 448ul, 896ul, 1248ul}) {
    const double ratio = baseline_attention_flops(384, 12, 16, r) /
                         count_flops(tiny, r).total_with_head;
    CHECK(ratio > prev);
    prev = ratio;
  }
  CHECK(baseline_attention_flops(384, 12, 16, 1248) >
        count_flops(tiny, 1248).total_with_head);
}

TEST_CASE("one optimizer step decreases the loss on a fixed batch") {
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ModelSpec spec = mini_spec(8, 32, {1, 1, 0, 0}, 5);
    Backbone<double> model(spec);
    model.init(seed * 31 + 7);
    Rng rng = stream(seed, "bb.lossdec");
    Tensor<double> img = random_tensor<double>({4, 32, 32, 3}, rng);
    std::vector<int> labels;
    for (int i = 0; i < 4; ++i) labels.push_back(int(rng.below(5)));

    auto params = model.params();
    AdamW<double> opt({0.9, 0.999, 1e-8, 0.0}, {1e-3, 1e-3, 0, 1});
    opt.attach(params);

    Tape<double> tape;
    Tensor<double> logits = model.forward(img, &tape);
    Tensor<double> grad;
    const double before = softmax_xent(logits, labels, 0.0, &grad);
    for (auto* p : params) p->zero_grad();
    model.backward(tape, grad);
    opt.step(params);
    const double after = softmax_xent(model.forward(img), labels, 0.0);
    if (after < before) ++ok;
  }
  CHECK(ok >= 18);
}

TEST_CASE("positional table is interpolated at non-native resolutions") {
  ModelSpec spec = mini_spec(8, 64, {1, 1, 0, 0}, 5);
  Backbone<double> model(spec);
  model.init(2);
  Tensor<double> img({1, 96, 96, 3});
  Tensor<double> logits = model.forward(img);
  CHECK(logits.extent(1) == 5);
  for (std::size_t i = 0; i < logits.numel(); ++i) CHECK(std::isfinite(logits[i]));

  // gradients at a non-native resolution are refused
  Tape<double> tape;
  (void)model.forward(img, &tape);
  Tensor<double> g({1, 5});
  CHECK_THROWS_AS(model.backward(tape, g), std::logic_error);
}

TEST_CASE("backward without a completed forward is rejected") {
  ModelSpec spec = mini_spec(8, 32, {1, 1, 0, 0}, 5);
  Backbone<double> model(spec);
  model.init(2);
  Tape<double> tape;
  Tensor<double> g({1, 5});
  CHECK_THROWS_AS(model.backward(tape, g), std::logic_error);
}

TEST_SUITE_END();
