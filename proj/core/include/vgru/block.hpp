// Copyright 2026 The VisionGRU Authors. Apache 2.0 License.
//
// The 2DGRU block. One pass over a (B,H,W,C) feature map:
//
//   norm -> depthwise conv -> minGRU over the forward raster order
//                             minGRU over the reversed raster order
//   core = input + forward-path + backward-path        (residual sum)
//   out  = core + FFN(norm(core))                      (optional FFN)
//
// closed_form_core evaluates the same pre-FFN quantity position by position
// from the expanded recurrence (explicit residual products), entirely with
// naive loops. It is the block's independent oracle and is O((H*W)^2), so
// keep it to small grids.

#pragma once

#include "vgru/mingru.hpp"

namespace vgru {

struct BlockSpec {
  std::size_t channels = 0;
  std::size_t dw_kernel = 3;
  double ffn_ratio = 4.0;
  bool ffn_enabled = true;

  std::size_t ffn_hidden() const {
    auto h = std::size_t(double(channels) * ffn_ratio);
    return h < 1 ? 1 : h;
  }

  void validate() const {
    if (channels == 0) throw std::invalid_argument("block channels must be >= 1");
    if (dw_kernel % 2 == 0)
      throw std::invalid_argument("depthwise kernel must be odd, got " +
                                  std::to_string(dw_kernel));
    if (ffn_ratio < 1.0)
      throw std::invalid_argument("ffn_ratio must be >= 1");
  }
};

enum class RasterDir { forward, backward };

// [B,H,W,C] -> [T=H*W, B, C]. Forward order is row-major (token i*W+j);
// backward is its exact reversal.
template <typename T>
Tensor<T> raster_flatten(const Tensor<T>& x, RasterDir dir) {
  const Shape4 s = Shape4::of(x);
  const std::size_t m = s.h * s.w;
  Tensor<T> y({m, s.b, s.c});
  const T* px = x.data();
  T* py = y.data();
  for (std::size_t b = 0; b < s.b; ++b) {
    for (std::size_t t = 0; t < m; ++t) {
      const std::size_t src = dir == RasterDir::forward ? t : m - 1 - t;
      const T* in = px + (b * m + src) * s.c;
      T* out = py + (t * s.b + b) * s.c;
      for (std::size_t c = 0; c < s.c; ++c) out[c] = in[c];
    }
  }
  return y;
}

// Exact inverse of raster_flatten for the same direction.
template <typename T>
Tensor<T> raster_unflatten(const Tensor<T>& x, RasterDir dir, const Shape4& s) {
  const std::size_t m = s.h * s.w;
  if (x.rank() != 3 || x.extent(0) != m || x.extent(1) != s.b ||
      x.extent(2) != s.c)
    throw std::invalid_argument("raster_unflatten expects [" +
                                std::to_string(m) + ",B,C], got " +
                                shape_str(x.shape()));
  Tensor<T> y(s.dims());
  const T* px = x.data();
  T* py = y.data();
  for (std::size_t b = 0; b < s.b; ++b) {
    for (std::size_t t = 0; t < m; ++t) {
      const std::size_t dst = dir == RasterDir::forward ? t : m - 1 - t;
      const T* in = px + (t * s.b + b) * s.c;
      T* out = py + (b * m + dst) * s.c;
      for (std::size_t c = 0; c < s.c; ++c) out[c] = in[c];
    }
  }
  return y;
}

template <typename T>
struct TwoDGRUBlock {
  BlockSpec spec;
  Param<T> norm1_g, norm1_b;
  Param<T> dw_k, dw_b;
  MinGRUCell<T> cell_fwd, cell_bwd;
  Param<T> norm2_g, norm2_b;
  Param<T> ffn_w1, ffn_b1, ffn_w2, ffn_b2;

  static constexpr T kNormEps = T(1e-6);

  void setup(const std::string& prefix, const BlockSpec& sp) {
    sp.validate();
    spec = sp;
    const std::size_t c = sp.channels, k = sp.dw_kernel, f = sp.ffn_hidden();
    norm1_g.setup(prefix + ".norm1.g", {c});
    norm1_b.setup(prefix + ".norm1.b", {c});
    dw_k.setup(prefix + ".dw.k", {k, k, c});
    dw_b.setup(prefix + ".dw.b", {c});
    cell_fwd.setup(prefix + ".fwd", c, c);
    cell_bwd.setup(prefix + ".bwd", c, c);
    norm2_g.setup(prefix + ".norm2.g", {c});
    norm2_b.setup(prefix + ".norm2.b", {c});
    ffn_w1.setup(prefix + ".ffn.w1", {c, f});
    ffn_b1.setup(prefix + ".ffn.b1", {f});
    ffn_w2.setup(prefix + ".ffn.w2", {f, c});
    ffn_b2.setup(prefix + ".ffn.b2", {c});
  }

  void init(Rng& rng) {
    norm1_g.value.fill(T(1));
    norm2_g.value.fill(T(1));
    init_uniform(dw_k, std::sqrt(1.0 / double(spec.dw_kernel * spec.dw_kernel)), rng);
    cell_fwd.init(rng);
    cell_bwd.init(rng);
    init_uniform(ffn_w1, std::sqrt(1.0 / double(spec.channels)), rng);
    init_uniform(ffn_w2, std::sqrt(1.0 / double(spec.ffn_hidden())), rng);
  }

  void collect(std::vector<Param<T>*>& out) {
    out.push_back(&norm1_g);
    out.push_back(&norm1_b);
    out.push_back(&dw_k);
    out.push_back(&dw_b);
    cell_fwd.collect(out);
    cell_bwd.collect(out);
    if (spec.ffn_enabled) {
      out.push_back(&norm2_g);
      out.push_back(&norm2_b);
      out.push_back(&ffn_w1);
      out.push_back(&ffn_b1);
      out.push_back(&ffn_w2);
      out.push_back(&ffn_b2);
    }
  }

  static std::size_t param_count(const BlockSpec& sp) {
    const std::size_t c = sp.channels, k = sp.dw_kernel, f = sp.ffn_hidden();
    std::size_t n = 2 * c;                                   // norm1
    n += k * k * c + c;                                      // depthwise
    n += 2 * MinGRUCell<T>::param_count(c, c);               // both paths
    if (sp.ffn_enabled) n += 2 * c + c * f + f + f * c + c;  // norm2 + ffn
    return n;
  }
};

template <typename T>
struct BlockCache {
  Tensor<T> f_in;
  LayerNormCache<T> ln1;
  Tensor<T> normed;  // conv input
  MinGRUCache<T> fwd, bwd;
  Tensor<T> core;  // pre-FFN output
  LayerNormCache<T> ln2;
  Tensor<T> ln2_out;
  Tensor<T> mid_pre;  // FFN hidden pre-activation
  Tensor<T> mid;      // FFN hidden post-activation
  Shape4 shape;
};

// Also exposes the pre-FFN core when `core_out` is given (what the
// closed-form oracle reproduces).
template <typename T>
Tensor<T> block_forward(const TwoDGRUBlock<T>& block, const Tensor<T>& f_in,
                        BlockCache<T>* cache = nullptr,
                        Tensor<T>* core_out = nullptr) {
  const Shape4 s = Shape4::of(f_in);
  if (s.c != block.spec.channels)
    throw std::invalid_argument("block channel mismatch: input " +
                                shape_str(f_in.shape()) + ", block expects C=" +
                                std::to_string(block.spec.channels));

  LayerNormCache<T> ln1;
  Tensor<T> normed = layer_norm(f_in, block.norm1_g.value, block.norm1_b.value,
                                TwoDGRUBlock<T>::kNormEps, cache ? &ln1 : nullptr);
  Tensor<T> conv = depthwise_conv2d(normed, block.dw_k.value, block.dw_b.value);

  Tensor<T> h_fwd = mingru_forward(block.cell_fwd,
                                   raster_flatten(conv, RasterDir::forward),
                                   cache ? &cache->fwd : nullptr);
  Tensor<T> h_bwd = mingru_forward(block.cell_bwd,
                                   raster_flatten(conv, RasterDir::backward),
                                   cache ? &cache->bwd : nullptr);

  Tensor<T> core = f_in;
  add_inplace(core, raster_unflatten(h_fwd, RasterDir::forward, s));
  add_inplace(core, raster_unflatten(h_bwd, RasterDir::backward, s));
  if (core_out) *core_out = core;

  Tensor<T> out;
  LayerNormCache<T> ln2;
  Tensor<T> ln2_out, mid_pre, mid;
  if (block.spec.ffn_enabled) {
    const std::size_t rows = s.b * s.h * s.w;
    ln2_out = layer_norm(core, block.norm2_g.value, block.norm2_b.value,
                         TwoDGRUBlock<T>::kNormEps, cache ? &ln2 : nullptr);
    mid_pre = linear(ln2_out.reshaped({rows, s.c}), block.ffn_w1.value,
                     block.ffn_b1.value);
    mid = gelu(mid_pre);
    Tensor<T> ffn = linear(mid, block.ffn_w2.value, block.ffn_b2.value);
    out = core;
    add_inplace(out, std::move(ffn).reshaped(s.dims()));
  } else {
    out = core;
  }

  if (cache) {
    cache->f_in = f_in;
    cache->ln1 = std::move(ln1);
    cache->normed = std::move(normed);
    cache->core = std::move(core);
    cache->ln2 = std::move(ln2);
    cache->ln2_out = std::move(ln2_out);
    cache->mid_pre = std::move(mid_pre);
    cache->mid = std::move(mid);
    cache->shape = s;
  }
  return out;
}

template <typename T>
Tensor<T> block_backward(TwoDGRUBlock<T>& block, const BlockCache<T>& cache,
                         const Tensor<T>& grad_out) {
  const Shape4 s = cache.shape;
  const std::size_t rows = s.b * s.h * s.w;

  Tensor<T> grad_core = grad_out;
  if (block.spec.ffn_enabled) {
    Tensor<T> g = grad_out.reshaped({rows, s.c});
    add_inplace(block.ffn_w2.grad, matmul_tn(cache.mid, g));
    add_inplace(block.ffn_b2.grad, col_sum(g));
    Tensor<T> dmid = matmul_nt(g, block.ffn_w2.value);
    {
      T* pd = dmid.data();
      const T* pp = cache.mid_pre.data();
      for (std::size_t i = 0, n = dmid.numel(); i < n; ++i)
        pd[i] *= gelu_grad_scalar(pp[i]);
    }
    const std::size_t rows2 = rows;
    Tensor<T> ln2_flat = cache.ln2_out.reshaped({rows2, s.c});
    add_inplace(block.ffn_w1.grad, matmul_tn(ln2_flat, dmid));
    add_inplace(block.ffn_b1.grad, col_sum(dmid));
    Tensor<T> dln2 = matmul_nt(dmid, block.ffn_w1.value).reshaped(s.dims());
    Tensor<T> dcore_norm =
        layer_norm_backward(dln2, block.norm2_g.value, cache.ln2,
                            block.norm2_g.grad, block.norm2_b.grad);
    add_inplace(grad_core, dcore_norm);
  }

  // core = f_in + unflatten(fwd path) + unflatten(bwd path)
  Tensor<T> grad_conv;
  {
    Tensor<T> gf = raster_flatten(grad_core, RasterDir::forward);
    Tensor<T> gx = mingru_backward(block.cell_fwd, cache.fwd, gf);
    grad_conv = raster_unflatten(gx, RasterDir::forward, s);
  }
  {
    Tensor<T> gb = raster_flatten(grad_core, RasterDir::backward);
    Tensor<T> gx = mingru_backward(block.cell_bwd, cache.bwd, gb);
    add_inplace(grad_conv, raster_unflatten(gx, RasterDir::backward, s));
  }

  Tensor<T> grad_normed = depthwise_conv2d_backward(
      grad_conv, cache.normed, block.dw_k.value, block.dw_k.grad, block.dw_b.grad);
  Tensor<T> grad_in = layer_norm_backward(grad_normed, block.norm1_g.value,
                                          cache.ln1, block.norm1_g.grad,
                                          block.norm1_b.grad);
  add_inplace(grad_in, grad_core);
  return grad_in;
}

// ---------------------------------------------------------------------------
// Direct evaluation of the expanded bidirectional recurrence. For output
// position with raster index L and token index m:
//
//   forward path   m <= L:  prod_{k=m+1..L} (1-z_fwd[k]) .* z_fwd[m] .* g_fwd[m]
//   backward path  m >= L:  prod_{k=L..m-1} (1-z_bwd[k]) .* z_bwd[m] .* g_bwd[m]
//   core[L] = f_in[L] + sum of both paths over m
//
// Norm, convolution, gates and products are all recomputed here with plain
// loops; nothing is shared with the scan-based path.

template <typename T>
Tensor<T> closed_form_core(const TwoDGRUBlock<T>& block, const Tensor<T>& f_in) {
  const Shape4 s = Shape4::of(f_in);
  const std::size_t m = s.h * s.w, c = s.c;
  const std::size_t K = block.spec.dw_kernel, P = (K - 1) / 2;
  Tensor<T> out(f_in.shape());

  for (std::size_t b = 0; b < s.b; ++b) {
    // per-position two-pass normalization
    std::vector<T> normed(m * c);
    for (std::size_t p = 0; p < m; ++p) {
      const T* row = f_in.data() + (b * m + p) * c;
      T mean = 0;
      for (std::size_t i = 0; i < c; ++i) mean += row[i];
      mean /= T(c);
      T var = 0;
      for (std::size_t i = 0; i < c; ++i) var += (row[i] - mean) * (row[i] - mean);
      var /= T(c);
      const T rstd = T(1) / std::sqrt(var + TwoDGRUBlock<T>::kNormEps);
      for (std::size_t i = 0; i < c; ++i)
        normed[p * c + i] = block.norm1_g.value[i] * ((row[i] - mean) * rstd) +
                            block.norm1_b.value[i];
    }

    // direct depthwise convolution
    std::vector<T> conv(m * c);
    for (std::size_t i = 0; i < s.h; ++i) {
      for (std::size_t j = 0; j < s.w; ++j) {
        for (std::size_t ch = 0; ch < c; ++ch) {
          T acc = block.dw_b.value[ch];
          for (std::size_t u = 0; u < K; ++u) {
            for (std::size_t v = 0; v < K; ++v) {
              const std::ptrdiff_t ii = std::ptrdiff_t(i + u) - std::ptrdiff_t(P);
              const std::ptrdiff_t jj = std::ptrdiff_t(j + v) - std::ptrdiff_t(P);
              if (ii < 0 || ii >= std::ptrdiff_t(s.h) || jj < 0 ||
                  jj >= std::ptrdiff_t(s.w))
                continue;
              acc += block.dw_k.value[(u * K + v) * c + ch] *
                     normed[(std::size_t(ii) * s.w + std::size_t(jj)) * c + ch];
            }
          }
          conv[(i * s.w + j) * c + ch] = acc;
        }
      }
    }

    // per-token gates and candidates for both directions
    std::vector<T> zf(m * c), gf(m * c), zb(m * c), gb(m * c);
    auto token_maps = [&](const MinGRUCell<T>& cell, std::vector<T>& z,
                          std::vector<T>& g) {
      for (std::size_t p = 0; p < m; ++p) {
        for (std::size_t o = 0; o < c; ++o) {
          T az = cell.b_z.value[o], ah = cell.b_h.value[o];
          for (std::size_t i = 0; i < c; ++i) {
            az += conv[p * c + i] * cell.w_z.value[i * c + o];
            ah += conv[p * c + i] * cell.w_h.value[i * c + o];
          }
          z[p * c + o] = sigmoid_scalar(az);
          g[p * c + o] = ah;
        }
      }
    };
    token_maps(block.cell_fwd, zf, gf);
    token_maps(block.cell_bwd, zb, gb);

    // expanded sums with explicit residual products
    std::vector<T> prod(c);
    for (std::size_t L = 0; L < m; ++L) {
      T* orow = out.data() + (b * m + L) * c;
      const T* irow = f_in.data() + (b * m + L) * c;
      for (std::size_t i = 0; i < c; ++i) orow[i] = irow[i];

      for (std::size_t i = 0; i < c; ++i) prod[i] = T(1);
      for (std::size_t mm = L + 1; mm-- > 0;) {
        for (std::size_t i = 0; i < c; ++i)
          orow[i] += prod[i] * zf[mm * c + i] * gf[mm * c + i];
        for (std::size_t i = 0; i < c; ++i) prod[i] *= (T(1) - zf[mm * c + i]);
      }

      for (std::size_t i = 0; i < c; ++i) prod[i] = T(1);
      for (std::size_t mm = L; mm < m; ++mm) {
        for (std::size_t i = 0; i < c; ++i)
          orow[i] += prod[i] * zb[mm * c + i] * gb[mm * c + i];
        for (std::size_t i = 0; i < c; ++i) prod[i] *= (T(1) - zb[mm * c + i]);
      }
    }
  }
  return out;
}

}  // namespace vgru
