// Copyright 2026 The VisionGRU Authors. Apache 2.0 License.
//
// The full VisionGRU backbone.
//
//   image (B,H,W,3)
//     -> stem: two stride-2 3x3 convolutions with a GELU between
//     -> + learned positional table (H/4, W/4, D)
//     -> stage 1..4 of 2DGRU blocks, patch-merging downsample between
//     -> global average pool -> linear head -> logits
//
// Stage widths are D, 2D, 4D, 4D; the grid shrinks H/4 -> H/8 -> H/16 ->
// H/32. Per-stage feature maps are exposed for dense downstream tasks.

#pragma once

#include <array>
#include <optional>

#include "vgru/block.hpp"

namespace vgru {

struct ModelSpec {
  std::string variant = "custom";
  std::array<std::size_t, 4> depths{2, 2, 8, 2};
  std::size_t base_width = 112;  // D
  std::size_t num_classes = 1000;
  std::size_t res_h = 224, res_w = 224;
  std::size_t dw_kernel = 3;
  double ffn_ratio = 4.0;
  bool ffn_enabled = true;

  std::array<std::size_t, 4> stage_widths() const {
    return {base_width, 2 * base_width, 4 * base_width, 4 * base_width};
  }

  void validate() const {
    if (base_width < 2 || base_width % 2 != 0)
      throw std::invalid_argument("base width must be an even integer >= 2");
    if (num_classes == 0) throw std::invalid_argument("num_classes must be >= 1");
    if (res_h % 32 != 0 || res_w % 32 != 0)
      throw std::invalid_argument(
          "model resolution must be divisible by 32, got " +
          std::to_string(res_h) + "x" + std::to_string(res_w));
    std::size_t total = 0;
    for (auto d : depths) total += d;
    if (total == 0) throw std::invalid_argument("at least one block required");
    BlockSpec{base_width, dw_kernel, ffn_ratio, ffn_enabled}.validate();
  }

  BlockSpec block_spec(std::size_t stage) const {
    return BlockSpec{stage_widths()[stage], dw_kernel, ffn_ratio, ffn_enabled};
  }

  // Named presets. Widths were picked by calibrate_width against the
  // published parameter budgets (Tiny 30M, Base 86M) at 1000 classes.
  static ModelSpec preset(const std::string& name);
};

// ---------------------------------------------------------------------------
// Parameter counting (analytic, itemized). Kept in lockstep with Backbone
// by a unit test that compares against the instantiated parameter list.

struct ParamBreakdown {
  std::size_t stem = 0;
  std::size_t pos = 0;
  std::array<std::size_t, 4> stages{0, 0, 0, 0};
  std::array<std::size_t, 3> downsamples{0, 0, 0};
  std::size_t head = 0;
  std::size_t total() const {
    std::size_t t = stem + pos + head;
    for (auto s : stages) t += s;
    for (auto d : downsamples) t += d;
    return t;
  }
};

inline ParamBreakdown count_params_breakdown(const ModelSpec& spec) {
  spec.validate();
  ParamBreakdown out;
  const std::size_t d = spec.base_width, mid = d / 2;
  out.stem = 3ull * 3 * 3 * mid + mid + 3ull * 3 * mid * d + d;
  out.pos = (spec.res_h / 4) * (spec.res_w / 4) * d;
  const auto widths = spec.stage_widths();
  for (std::size_t s = 0; s < 4; ++s) {
    out.stages[s] =
        spec.depths[s] * TwoDGRUBlock<double>::param_count(spec.block_spec(s));
  }
  for (std::size_t i = 0; i < 3; ++i) {
    const std::size_t cin = 4 * widths[i], cout = widths[i + 1];
    out.downsamples[i] = 2 * cin + cin * cout + cout;  // norm + linear
  }
  out.head = widths[3] * spec.num_classes + spec.num_classes;
  return out;
}

inline std::size_t count_params(const ModelSpec& spec) {
  return count_params_breakdown(spec).total();
}

struct CalibrationResult {
  std::size_t width = 0;
  std::size_t params = 0;
  std::vector<std::pair<std::size_t, std::size_t>> sweep;  // (D, count)
};

// Sweeps D over multiples of 16 and picks the count closest to the target.
inline CalibrationResult calibrate_width(const ModelSpec& base,
                                         std::size_t target_params,
                                         std::size_t d_min = 16,
                                         std::size_t d_max = 320) {
  CalibrationResult r;
  long long best = -1;
  for (std::size_t d = d_min; d <= d_max; d += 16) {
    ModelSpec s = base;
    s.base_width = d;
    const std::size_t n = count_params(s);
    r.sweep.emplace_back(d, n);
    const long long dist = std::llabs((long long)n - (long long)target_params);
    if (best < 0 || dist < best) {
      best = dist;
      r.width = d;
      r.params = n;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------

template <typename T>
struct Downsample {
  Param<T> norm_g, norm_b;  // over 4c
  Param<T> w, b;            // 4c -> c'
  std::size_t c_in = 0, c_out = 0;

  void setup(const std::string& prefix, std::size_t cin, std::size_t cout) {
    c_in = cin;
    c_out = cout;
    norm_g.setup(prefix + ".norm.g", {4 * cin});
    norm_b.setup(prefix + ".norm.b", {4 * cin});
    w.setup(prefix + ".w", {4 * cin, cout});
    b.setup(prefix + ".b", {cout});
  }
  void init(Rng& rng) {
    norm_g.value.fill(T(1));
    init_uniform(w, std::sqrt(1.0 / double(4 * c_in)), rng);
  }
  void collect(std::vector<Param<T>*>& out) {
    out.push_back(&norm_g);
    out.push_back(&norm_b);
    out.push_back(&w);
    out.push_back(&b);
  }
};

// Concatenates each 2x2 neighborhood: [B,h,w,c] -> [B,h/2,w/2,4c], children
// in (di,dj) = (0,0),(0,1),(1,0),(1,1) order.
template <typename T>
Tensor<T> merge_2x2(const Tensor<T>& x) {
  const Shape4 s = Shape4::of(x);
  if (s.h % 2 != 0 || s.w % 2 != 0)
    throw std::invalid_argument("downsample needs even spatial extents, got " +
                                shape_str(x.shape()));
  const std::size_t ho = s.h / 2, wo = s.w / 2;
  Tensor<T> y({s.b, ho, wo, 4 * s.c});
  const T* px = x.data();
  T* py = y.data();
  for (std::size_t b = 0; b < s.b; ++b)
    for (std::size_t i = 0; i < ho; ++i)
      for (std::size_t j = 0; j < wo; ++j) {
        T* out = py + ((b * ho + i) * wo + j) * 4 * s.c;
        for (std::size_t di = 0; di < 2; ++di)
          for (std::size_t dj = 0; dj < 2; ++dj) {
            const T* in =
                px + ((b * s.h + 2 * i + di) * s.w + (2 * j + dj)) * s.c;
            T* dst = out + (di * 2 + dj) * s.c;
            for (std::size_t ch = 0; ch < s.c; ++ch) dst[ch] = in[ch];
          }
      }
  return y;
}

template <typename T>
Tensor<T> merge_2x2_backward(const Tensor<T>& grad_y, const Shape4& in_shape) {
  const Shape4 s = in_shape;
  const std::size_t ho = s.h / 2, wo = s.w / 2;
  Tensor<T> gx(s.dims());
  const T* pg = grad_y.data();
  T* px = gx.data();
  for (std::size_t b = 0; b < s.b; ++b)
    for (std::size_t i = 0; i < ho; ++i)
      for (std::size_t j = 0; j < wo; ++j) {
        const T* in = pg + ((b * ho + i) * wo + j) * 4 * s.c;
        for (std::size_t di = 0; di < 2; ++di)
          for (std::size_t dj = 0; dj < 2; ++dj) {
            T* out = px + ((b * s.h + 2 * i + di) * s.w + (2 * j + dj)) * s.c;
            const T* src = in + (di * 2 + dj) * s.c;
            for (std::size_t ch = 0; ch < s.c; ++ch) out[ch] = src[ch];
          }
      }
  return gx;
}

// ---------------------------------------------------------------------------
// Tape: the recorded forward pass. backward() walks it once in reverse.

template <typename T>
struct Tape {
  bool complete = false;
  bool pos_interpolated = false;
  Tensor<T> image;
  Tensor<T> stem_pre;  // conv1 output, pre-GELU
  Tensor<T> stem_mid;  // conv2 input
  std::array<std::vector<BlockCache<T>>, 4> stages;
  struct DsCache {
    Tensor<T> merged;
    LayerNormCache<T> ln;
    Tensor<T> ln_out;
    Shape4 in_shape;
  };
  std::array<DsCache, 3> ds;
  Shape4 pool_in{};
  Tensor<T> pooled;
};

template <typename T>
struct ForwardResult {
  Tensor<T> logits;
  std::array<Tensor<T>, 4> stage_features;
};

template <typename T>
class Backbone {
 public:
  explicit Backbone(const ModelSpec& spec) : spec_(spec) {
    spec.validate();
    const std::size_t d = spec.base_width;
    conv1_k_.setup("stem.conv1.k", {3, 3, 3, d / 2});
    conv1_b_.setup("stem.conv1.b", {d / 2});
    conv2_k_.setup("stem.conv2.k", {3, 3, d / 2, d});
    conv2_b_.setup("stem.conv2.b", {d});
    pos_.setup("pos.table", {spec.res_h / 4, spec.res_w / 4, d});
    const auto widths = spec.stage_widths();
    for (std::size_t s = 0; s < 4; ++s) {
      stages_[s].resize(spec.depths[s]);
      for (std::size_t i = 0; i < spec.depths[s]; ++i) {
        stages_[s][i].setup("s" + std::to_string(s + 1) + ".b" + std::to_string(i),
                            spec.block_spec(s));
      }
    }
    for (std::size_t i = 0; i < 3; ++i) {
      ds_[i].setup("ds" + std::to_string(i + 1), widths[i], widths[i + 1]);
    }
    head_w_.setup("head.w", {widths[3], spec.num_classes});
    head_b_.setup("head.b", {spec.num_classes});
  }

  const ModelSpec& spec() const { return spec_; }

  void init(std::uint64_t seed) {
    Rng r_stem = stream(seed, "init.stem");
    init_uniform(conv1_k_, std::sqrt(1.0 / (9.0 * 3.0)), r_stem);
    init_uniform(conv2_k_, std::sqrt(1.0 / (9.0 * double(spec_.base_width / 2))),
                 r_stem);
    Rng r_pos = stream(seed, "init.pos");
    init_uniform(pos_, 0.02, r_pos);
    for (std::size_t s = 0; s < 4; ++s) {
      for (std::size_t i = 0; i < stages_[s].size(); ++i) {
        Rng r = stream(seed, "init.block", s * 64 + i);
        stages_[s][i].init(r);
      }
    }
    for (std::size_t i = 0; i < 3; ++i) {
      Rng r = stream(seed, "init.ds", i);
      ds_[i].init(r);
    }
    Rng r_head = stream(seed, "init.head");
    init_uniform(head_w_, std::sqrt(1.0 / double(spec_.stage_widths()[3])), r_head);
  }

  std::vector<Param<T>*> params() {
    std::vector<Param<T>*> out;
    conv_collect(out);
    return out;
  }

  // Forward pass. Records a tape when given; collects per-stage features
  // when `features` is set.
  Tensor<T> forward(const Tensor<T>& image, Tape<T>* tape = nullptr,
                    std::array<Tensor<T>, 4>* features = nullptr) const {
    const Shape4 s = Shape4::of(image);
    if (s.c != 3)
      throw std::invalid_argument("expected RGB input [B,H,W,3], got " +
                                  shape_str(image.shape()));
    if (s.h % 32 != 0 || s.w % 32 != 0)
      throw std::invalid_argument(
          "input resolution must be divisible by 32 (stem /4, three "
          "downsamples /8), got " +
          std::to_string(s.h) + "x" + std::to_string(s.w));

    Tensor<T> pre = conv2d(image, conv1_k_.value, conv1_b_.value, 2);
    Tensor<T> mid = gelu(pre);
    Tensor<T> x = conv2d(mid, conv2_k_.value, conv2_b_.value, 2);

    // positional table, bilinear-resampled away from the native grid
    const std::size_t gh = s.h / 4, gw = s.w / 4;
    bool interp = gh != pos_.value.extent(0) || gw != pos_.value.extent(1);
    {
      Tensor<T> table = pos_.value.reshaped(
          {1, pos_.value.extent(0), pos_.value.extent(1), spec_.base_width});
      if (interp) table = bilinear_resize(table, gh, gw);
      const T* pt = table.data();
      T* px = x.data();
      const std::size_t grid = gh * gw * spec_.base_width;
      for (std::size_t b = 0; b < s.b; ++b)
        for (std::size_t i = 0; i < grid; ++i) px[b * grid + i] += pt[i];
    }

    if (tape) {
      tape->image = image;
      tape->stem_pre = std::move(pre);
      tape->stem_mid = std::move(mid);
      tape->pos_interpolated = interp;
      for (auto& st : tape->stages) st.clear();
    }

    for (std::size_t st = 0; st < 4; ++st) {
      if (tape) tape->stages[st].resize(stages_[st].size());
      for (std::size_t i = 0; i < stages_[st].size(); ++i) {
        x = block_forward(stages_[st][i], x,
                          tape ? &tape->stages[st][i] : nullptr);
      }
      if (features) (*features)[st] = x;
      if (st < 3) {
        Tensor<T> merged = merge_2x2(x);
        LayerNormCache<T> ln;
        Tensor<T> ln_out =
            layer_norm(merged, ds_[st].norm_g.value, ds_[st].norm_b.value,
                       T(1e-6), tape ? &ln : nullptr);
        const Shape4 ms = Shape4::of(ln_out);
        Tensor<T> flat = ln_out.reshaped({ms.b * ms.h * ms.w, ms.c});
        Tensor<T> proj = linear(flat, ds_[st].w.value, ds_[st].b.value);
        if (tape) {
          tape->ds[st].in_shape = Shape4::of(x);
          tape->ds[st].merged = std::move(merged);
          tape->ds[st].ln = std::move(ln);
          tape->ds[st].ln_out = std::move(ln_out);
        }
        x = std::move(proj).reshaped({ms.b, ms.h, ms.w, ds_[st].c_out});
      }
    }

    if (tape) tape->pool_in = Shape4::of(x);
    Tensor<T> pooled = avg_pool_global(x);
    if (tape) tape->pooled = pooled;
    Tensor<T> logits = linear(pooled, head_w_.value, head_b_.value);
    check_finite(logits, "backbone forward");
    if (tape) tape->complete = true;
    return logits;
  }

  ForwardResult<T> forward_features(const Tensor<T>& image) const {
    ForwardResult<T> r;
    r.logits = forward(image, nullptr, &r.stage_features);
    return r;
  }

  // Reverse-mode pass over a recorded tape. Accumulates into param grads
  // and returns grad wrt the input image.
  Tensor<T> backward(const Tape<T>& tape, const Tensor<T>& grad_logits) {
    if (!tape.complete)
      throw std::logic_error("backward requires a completed forward tape");

    add_inplace(head_w_.grad, matmul_tn(tape.pooled, grad_logits));
    add_inplace(head_b_.grad, col_sum(grad_logits));
    Tensor<T> grad_pooled = matmul_nt(grad_logits, head_w_.value);
    Tensor<T> grad = avg_pool_global_backward(grad_pooled, tape.pool_in);

    for (std::size_t st = 4; st-- > 0;) {
      if (st < 3) {
        // through downsample st
        const auto& d = tape.ds[st];
        const Shape4 ms = Shape4::of(d.ln_out);
        Tensor<T> g =
            grad.reshaped({ms.b * ms.h * ms.w, ds_[st].c_out});
        Tensor<T> flat = d.ln_out.reshaped({ms.b * ms.h * ms.w, ms.c});
        add_inplace(ds_[st].w.grad, matmul_tn(flat, g));
        add_inplace(ds_[st].b.grad, col_sum(g));
        Tensor<T> dln =
            matmul_nt(g, ds_[st].w.value).reshaped({ms.b, ms.h, ms.w, ms.c});
        Tensor<T> dmerged =
            layer_norm_backward(dln, ds_[st].norm_g.value, d.ln,
                                ds_[st].norm_g.grad, ds_[st].norm_b.grad);
        grad = merge_2x2_backward(dmerged, d.in_shape);
      }
      for (std::size_t i = stages_[st].size(); i-- > 0;) {
        grad = block_backward(stages_[st][i], tape.stages[st][i], grad);
      }
    }

    // positional table gradient: sum over batch
    if (tape.pos_interpolated)
      throw std::logic_error(
          "training at a non-native resolution is unsupported (positional "
          "table was interpolated)");
    {
      const std::size_t grid = pos_.value.numel();
      T* pg = pos_.grad.data();
      const T* pd = grad.data();
      const std::size_t batch = grad.extent(0);
      for (std::size_t i = 0; i < grid; ++i) {
        T acc = 0;
        for (std::size_t b = 0; b < batch; ++b) acc += pd[b * grid + i];
        pg[i] += acc;
      }
    }

    Tensor<T> grad_mid = conv2d_backward(grad, tape.stem_mid, conv2_k_.value, 2,
                                         conv2_k_.grad, conv2_b_.grad);
    {
      T* pm = grad_mid.data();
      const T* pp = tape.stem_pre.data();
      for (std::size_t i = 0, n = grad_mid.numel(); i < n; ++i)
        pm[i] *= gelu_grad_scalar(pp[i]);
    }
    return conv2d_backward(grad_mid, tape.image, conv1_k_.value, 2,
                           conv1_k_.grad, conv1_b_.grad);
  }

 private:
  void conv_collect(std::vector<Param<T>*>& out) {
    out.push_back(&conv1_k_);
    out.push_back(&conv1_b_);
    out.push_back(&conv2_k_);
    out.push_back(&conv2_b_);
    out.push_back(&pos_);
    for (auto& st : stages_)
      for (auto& blk : st) blk.collect(out);
    for (auto& d : ds_) d.collect(out);
    out.push_back(&head_w_);
    out.push_back(&head_b_);
  }

  ModelSpec spec_;
  Param<T> conv1_k_, conv1_b_, conv2_k_, conv2_b_;
  Param<T> pos_;
  std::array<std::vector<TwoDGRUBlock<T>>, 4> stages_;
  std::array<Downsample<T>, 3> ds_;
  Param<T> head_w_, head_b_;
};

inline ModelSpec ModelSpec::preset(const std::string& name) {
  ModelSpec s;
  if (name == "tiny") {
    s.variant = "tiny";
    s.depths = {2, 2, 8, 2};
    s.base_width = 112;
  } else if (name == "base") {
    s.variant = "base";
    s.depths = {2, 2, 15, 2};
    s.base_width = 160;
  } else {
    throw std::invalid_argument("unknown model variant: " + name +
                                " (expected tiny or base)");
  }
  return s;
}

}  // namespace vgru
