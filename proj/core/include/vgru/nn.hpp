// Copyright 2026 The VisionGRU Authors. Apache 2.0 License.
//
// Neural primitives over channels-last tensors: activations, layer norm,
// depthwise and strided dense convolution, pooling, resampling, and the
// classification loss. Forward passes and hand-derived adjoints live next
// to each other so the pairing stays auditable.

#pragma once

#include "vgru/tensor.hpp"

namespace vgru {

// ---------------------------------------------------------------------------
// Scalar activations

template <typename T>
inline T sigmoid_scalar(T x) {
  // branch keeps exp() argument non-positive
  if (x >= T(0)) {
    return T(1) / (T(1) + std::exp(-x));
  }
  T e = std::exp(x);
  return e / (T(1) + e);
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  Tensor<T> y = map(x, [](T v) { return sigmoid_scalar(v); });
  check_finite(y, "sigmoid");
  return y;
}

template <typename T>
inline T gelu_scalar(T x) {
  return T(0.5) * x * (T(1) + std::erf(x * T(0.7071067811865475)));
}

template <typename T>
inline T gelu_grad_scalar(T x) {
  const T cdf = T(0.5) * (T(1) + std::erf(x * T(0.7071067811865475)));
  const T pdf = T(0.3989422804014327) * std::exp(T(-0.5) * x * x);
  return cdf + x * pdf;
}

template <typename T>
Tensor<T> gelu(const Tensor<T>& x) {
  return map(x, [](T v) { return gelu_scalar(v); });
}

// ---------------------------------------------------------------------------
// Layer normalization over the trailing (channel) axis

template <typename T>
struct LayerNormCache {
  Tensor<T> xhat;  // normalized input, pre-affine
  Tensor<T> rstd;  // 1/sqrt(var+eps) per position
};

template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma,
                     const Tensor<T>& beta, T eps,
                     LayerNormCache<T>* cache = nullptr) {
  if (x.rank() < 1 || gamma.rank() != 1 || beta.rank() != 1)
    throw std::invalid_argument("layer_norm expects [..,C] input");
  const std::size_t c = x.extent(x.rank() - 1);
  if (gamma.extent(0) != c || beta.extent(0) != c)
    throw std::invalid_argument(
        "layer_norm channel mismatch: input " + shape_str(x.shape()) +
        ", gamma " + shape_str(gamma.shape()));
  const std::size_t rows = x.numel() / c;

  Tensor<T> y(x.shape());
  if (cache) {
    cache->xhat = Tensor<T>(x.shape());
    cache->rstd = Tensor<T>({rows});
  }
  const T* px = x.data();
  const T* pg = gamma.data();
  const T* pb = beta.data();
  T* py = y.data();
  T* pxh = cache ? cache->xhat.data() : nullptr;
  T* prs = cache ? cache->rstd.data() : nullptr;

  parallel_for(rows, 64, [&](std::size_t r0, std::size_t r1) {
    for (std::size_t r = r0; r < r1; ++r) {
      const T* row = px + r * c;
      T mean = 0;
      for (std::size_t i = 0; i < c; ++i) mean += row[i];
      mean /= T(c);
      T var = 0;
      for (std::size_t i = 0; i < c; ++i) {
        T d = row[i] - mean;
        var += d * d;
      }
      var /= T(c);
      const T rstd = T(1) / std::sqrt(var + eps);
      T* orow = py + r * c;
      for (std::size_t i = 0; i < c; ++i) {
        T xh = (row[i] - mean) * rstd;
        if (pxh) pxh[r * c + i] = xh;
        orow[i] = pg[i] * xh + pb[i];
      }
      if (prs) prs[r] = rstd;
    }
  });
  check_finite(y, "layer_norm");
  return y;
}

template <typename T>
Tensor<T> layer_norm_backward(const Tensor<T>& grad_y, const Tensor<T>& gamma,
                              const LayerNormCache<T>& cache,
                              Tensor<T>& grad_gamma, Tensor<T>& grad_beta) {
  const std::size_t c = grad_y.extent(grad_y.rank() - 1);
  const std::size_t rows = grad_y.numel() / c;
  Tensor<T> grad_x(grad_y.shape());
  const T* pdy = grad_y.data();
  const T* pg = gamma.data();
  const T* pxh = cache.xhat.data();
  const T* prs = cache.rstd.data();
  T* pdx = grad_x.data();

  parallel_for(rows, 64, [&](std::size_t r0, std::size_t r1) {
    for (std::size_t r = r0; r < r1; ++r) {
      const T* dyrow = pdy + r * c;
      const T* xhrow = pxh + r * c;
      T sum_dxhat = 0, sum_dxhat_xhat = 0;
      for (std::size_t i = 0; i < c; ++i) {
        T dxh = dyrow[i] * pg[i];
        sum_dxhat += dxh;
        sum_dxhat_xhat += dxh * xhrow[i];
      }
      const T inv_c = T(1) / T(c);
      const T rstd = prs[r];
      T* dxrow = pdx + r * c;
      for (std::size_t i = 0; i < c; ++i) {
        T dxh = dyrow[i] * pg[i];
        dxrow[i] =
            rstd * (dxh - inv_c * sum_dxhat - xhrow[i] * inv_c * sum_dxhat_xhat);
      }
    }
  });

  // channel reductions, ascending row order
  const T* pdy2 = grad_y.data();
  T* pgg = grad_gamma.data();
  T* pgb = grad_beta.data();
  for (std::size_t i = 0; i < c; ++i) {
    T gg = 0, gb = 0;
    for (std::size_t r = 0; r < rows; ++r) {
      gg += pdy2[r * c + i] * pxh[r * c + i];
      gb += pdy2[r * c + i];
    }
    pgg[i] += gg;
    pgb[i] += gb;
  }
  return grad_x;
}

// ---------------------------------------------------------------------------
// Depthwise convolution, odd K, zero padding, spatial extents preserved

template <typename T>
Tensor<T> depthwise_conv2d(const Tensor<T>& x, const Tensor<T>& k,
                           const Tensor<T>& bias) {
  const Shape4 s = Shape4::of(x);
  if (k.rank() != 3 || k.extent(0) != k.extent(1) || k.extent(2) != s.c)
    throw std::invalid_argument("depthwise kernel must be [K,K,C], got " +
                                shape_str(k.shape()) + " for input " +
                                shape_str(x.shape()));
  const std::size_t K = k.extent(0);
  if (K % 2 == 0)
    throw std::invalid_argument("depthwise kernel size must be odd, got " +
                                std::to_string(K));
  if (bias.rank() != 1 || bias.extent(0) != s.c)
    throw std::invalid_argument("depthwise bias must be [C]");
  const std::size_t P = (K - 1) / 2;

  Tensor<T> y(x.shape());
  const T* px = x.data();
  const T* pk = k.data();
  const T* pb = bias.data();
  T* py = y.data();
  const std::size_t hw = s.h * s.w;

  parallel_for(s.b * s.h, 8, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t bi = lo; bi < hi; ++bi) {
      const std::size_t b = bi / s.h, i = bi % s.h;
      for (std::size_t j = 0; j < s.w; ++j) {
        T* out = py + ((b * hw + i * s.w + j) * s.c);
        for (std::size_t ch = 0; ch < s.c; ++ch) out[ch] = pb[ch];
        for (std::size_t u = 0; u < K; ++u) {
          const std::ptrdiff_t ii = std::ptrdiff_t(i + u) - std::ptrdiff_t(P);
          if (ii < 0 || ii >= std::ptrdiff_t(s.h)) continue;
          for (std::size_t v = 0; v < K; ++v) {
            const std::ptrdiff_t jj = std::ptrdiff_t(j + v) - std::ptrdiff_t(P);
            if (jj < 0 || jj >= std::ptrdiff_t(s.w)) continue;
            const T* in = px + ((b * hw + std::size_t(ii) * s.w + std::size_t(jj)) * s.c);
            const T* kk = pk + (u * K + v) * s.c;
            for (std::size_t ch = 0; ch < s.c; ++ch) out[ch] += kk[ch] * in[ch];
          }
        }
      }
    }
  });
  check_finite(y, "depthwise_conv2d");
  return y;
}

template <typename T>
Tensor<T> depthwise_conv2d_backward(const Tensor<T>& grad_y, const Tensor<T>& x,
                                    const Tensor<T>& k, Tensor<T>& grad_k,
                                    Tensor<T>& grad_bias) {
  const Shape4 s = Shape4::of(x);
  const std::size_t K = k.extent(0), P = (K - 1) / 2;
  const std::size_t hw = s.h * s.w;
  const T* pdy = grad_y.data();
  const T* px = x.data();
  const T* pk = k.data();

  Tensor<T> grad_x(x.shape());
  T* pdx = grad_x.data();
  parallel_for(s.b * s.h, 8, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t bi = lo; bi < hi; ++bi) {
      const std::size_t b = bi / s.h, i = bi % s.h;
      for (std::size_t j = 0; j < s.w; ++j) {
        T* out = pdx + ((b * hw + i * s.w + j) * s.c);
        for (std::size_t u = 0; u < K; ++u) {
          const std::ptrdiff_t ii = std::ptrdiff_t(i + P) - std::ptrdiff_t(u);
          if (ii < 0 || ii >= std::ptrdiff_t(s.h)) continue;
          for (std::size_t v = 0; v < K; ++v) {
            const std::ptrdiff_t jj = std::ptrdiff_t(j + P) - std::ptrdiff_t(v);
            if (jj < 0 || jj >= std::ptrdiff_t(s.w)) continue;
            const T* dyp = pdy + ((b * hw + std::size_t(ii) * s.w + std::size_t(jj)) * s.c);
            const T* kk = pk + (u * K + v) * s.c;
            for (std::size_t ch = 0; ch < s.c; ++ch) out[ch] += kk[ch] * dyp[ch];
          }
        }
      }
    }
  });

  // kernel and bias gradients; per (u,v,ch), ascending spatial order
  T* pgk = grad_k.data();
  T* pgb = grad_bias.data();
  for (std::size_t u = 0; u < K; ++u) {
    for (std::size_t v = 0; v < K; ++v) {
      for (std::size_t ch = 0; ch < s.c; ++ch) {
        T acc = 0;
        for (std::size_t b = 0; b < s.b; ++b) {
          for (std::size_t i = 0; i < s.h; ++i) {
            const std::ptrdiff_t ii = std::ptrdiff_t(i + u) - std::ptrdiff_t(P);
            if (ii < 0 || ii >= std::ptrdiff_t(s.h)) continue;
            for (std::size_t j = 0; j < s.w; ++j) {
              const std::ptrdiff_t jj = std::ptrdiff_t(j + v) - std::ptrdiff_t(P);
              if (jj < 0 || jj >= std::ptrdiff_t(s.w)) continue;
              acc += pdy[(b * hw + i * s.w + j) * s.c + ch] *
                     px[(b * hw + std::size_t(ii) * s.w + std::size_t(jj)) * s.c + ch];
            }
          }
        }
        pgk[(u * K + v) * s.c + ch] += acc;
      }
    }
  }
  for (std::size_t ch = 0; ch < s.c; ++ch) {
    T acc = 0;
    for (std::size_t r = 0; r < s.b * hw; ++r) acc += pdy[r * s.c + ch];
    pgb[ch] += acc;
  }
  return grad_x;
}

// ---------------------------------------------------------------------------
// Dense strided convolution (stem only): kernel [K,K,Cin,Cout], zero pad
// (K-1)/2, output spatial extents H/stride x W/stride.

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& k, const Tensor<T>& bias,
                 std::size_t stride) {
  const Shape4 s = Shape4::of(x);
  if (k.rank() != 4 || k.extent(0) != k.extent(1) || k.extent(2) != s.c)
    throw std::invalid_argument("conv2d kernel must be [K,K,Cin,Cout], got " +
                                shape_str(k.shape()) + " for input " +
                                shape_str(x.shape()));
  const std::size_t K = k.extent(0), co = k.extent(3), P = (K - 1) / 2;
  if (s.h % stride != 0 || s.w % stride != 0)
    throw std::invalid_argument("conv2d input extents must divide the stride");
  const std::size_t ho = s.h / stride, wo = s.w / stride;

  Tensor<T> y({s.b, ho, wo, co});
  const T* px = x.data();
  const T* pk = k.data();
  const T* pb = bias.data();
  T* py = y.data();

  parallel_for(s.b * ho, 4, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t bi = lo; bi < hi; ++bi) {
      const std::size_t b = bi / ho, i = bi % ho;
      for (std::size_t j = 0; j < wo; ++j) {
        T* out = py + ((b * ho + i) * wo + j) * co;
        for (std::size_t o = 0; o < co; ++o) out[o] = pb[o];
        for (std::size_t u = 0; u < K; ++u) {
          const std::ptrdiff_t ii = std::ptrdiff_t(i * stride + u) - std::ptrdiff_t(P);
          if (ii < 0 || ii >= std::ptrdiff_t(s.h)) continue;
          for (std::size_t v = 0; v < K; ++v) {
            const std::ptrdiff_t jj = std::ptrdiff_t(j * stride + v) - std::ptrdiff_t(P);
            if (jj < 0 || jj >= std::ptrdiff_t(s.w)) continue;
            const T* in = px + ((b * s.h + std::size_t(ii)) * s.w + std::size_t(jj)) * s.c;
            const T* kk = pk + (u * K + v) * s.c * co;
            for (std::size_t ci = 0; ci < s.c; ++ci) {
              const T xv = in[ci];
              const T* krow = kk + ci * co;
              for (std::size_t o = 0; o < co; ++o) out[o] += xv * krow[o];
            }
          }
        }
      }
    }
  });
  check_finite(y, "conv2d");
  return y;
}

template <typename T>
Tensor<T> conv2d_backward(const Tensor<T>& grad_y, const Tensor<T>& x,
                          const Tensor<T>& k, std::size_t stride,
                          Tensor<T>& grad_k, Tensor<T>& grad_bias) {
  const Shape4 s = Shape4::of(x);
  const std::size_t K = k.extent(0), co = k.extent(3), P = (K - 1) / 2;
  const std::size_t ho = s.h / stride, wo = s.w / stride;
  const T* pdy = grad_y.data();
  const T* px = x.data();
  const T* pk = k.data();

  Tensor<T> grad_x(x.shape());
  T* pdx = grad_x.data();
  parallel_for(s.b * s.h, 4, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t bp = lo; bp < hi; ++bp) {
      const std::size_t b = bp / s.h, p = bp % s.h;
      for (std::size_t q = 0; q < s.w; ++q) {
        T* out = pdx + ((b * s.h + p) * s.w + q) * s.c;
        for (std::size_t u = 0; u < K; ++u) {
          const std::ptrdiff_t num_i = std::ptrdiff_t(p + P) - std::ptrdiff_t(u);
          if (num_i < 0 || num_i % std::ptrdiff_t(stride) != 0) continue;
          const std::size_t i = std::size_t(num_i) / stride;
          if (i >= ho) continue;
          for (std::size_t v = 0; v < K; ++v) {
            const std::ptrdiff_t num_j = std::ptrdiff_t(q + P) - std::ptrdiff_t(v);
            if (num_j < 0 || num_j % std::ptrdiff_t(stride) != 0) continue;
            const std::size_t j = std::size_t(num_j) / stride;
            if (j >= wo) continue;
            const T* dyp = pdy + ((b * ho + i) * wo + j) * co;
            const T* kk = pk + ((u * K + v) * s.c) * co;
            for (std::size_t ci = 0; ci < s.c; ++ci) {
              const T* krow = kk + ci * co;
              T acc = 0;
              for (std::size_t o = 0; o < co; ++o) acc += krow[o] * dyp[o];
              out[ci] += acc;
            }
          }
        }
      }
    }
  });

  T* pgk = grad_k.data();
  T* pgb = grad_bias.data();
  for (std::size_t u = 0; u < K; ++u) {
    for (std::size_t v = 0; v < K; ++v) {
      for (std::size_t ci = 0; ci < s.c; ++ci) {
        for (std::size_t o = 0; o < co; ++o) {
          T acc = 0;
          for (std::size_t b = 0; b < s.b; ++b) {
            for (std::size_t i = 0; i < ho; ++i) {
              const std::ptrdiff_t ii = std::ptrdiff_t(i * stride + u) - std::ptrdiff_t(P);
              if (ii < 0 || ii >= std::ptrdiff_t(s.h)) continue;
              for (std::size_t j = 0; j < wo; ++j) {
                const std::ptrdiff_t jj = std::ptrdiff_t(j * stride + v) - std::ptrdiff_t(P);
                if (jj < 0 || jj >= std::ptrdiff_t(s.w)) continue;
                acc += px[((b * s.h + std::size_t(ii)) * s.w + std::size_t(jj)) * s.c + ci] *
                       pdy[((b * ho + i) * wo + j) * co + o];
              }
            }
          }
          pgk[((u * K + v) * s.c + ci) * co + o] += acc;
        }
      }
    }
  }
  for (std::size_t o = 0; o < co; ++o) {
    T acc = 0;
    for (std::size_t r = 0; r < s.b * ho * wo; ++r) acc += pdy[r * co + o];
    pgb[o] += acc;
  }
  return grad_x;
}

// ---------------------------------------------------------------------------
// Global average pooling: [B,H,W,C] -> [B,C]

template <typename T>
Tensor<T> avg_pool_global(const Tensor<T>& x) {
  const Shape4 s = Shape4::of(x);
  Tensor<T> y({s.b, s.c});
  const T* px = x.data();
  T* py = y.data();
  const T inv = T(1) / T(s.h * s.w);
  for (std::size_t b = 0; b < s.b; ++b) {
    for (std::size_t ch = 0; ch < s.c; ++ch) {
      T acc = 0;
      for (std::size_t r = 0; r < s.h * s.w; ++r)
        acc += px[(b * s.h * s.w + r) * s.c + ch];
      py[b * s.c + ch] = acc * inv;
    }
  }
  return y;
}

template <typename T>
Tensor<T> avg_pool_global_backward(const Tensor<T>& grad_y, const Shape4& s) {
  Tensor<T> grad_x(s.dims());
  const T* pdy = grad_y.data();
  T* pdx = grad_x.data();
  const T inv = T(1) / T(s.h * s.w);
  for (std::size_t b = 0; b < s.b; ++b)
    for (std::size_t r = 0; r < s.h * s.w; ++r)
      for (std::size_t ch = 0; ch < s.c; ++ch)
        pdx[(b * s.h * s.w + r) * s.c + ch] = pdy[b * s.c + ch] * inv;
  return grad_x;
}

// ---------------------------------------------------------------------------
// Bilinear resampling (half-pixel centers). Forward-only: used to resize
// inputs and to interpolate the positional table at non-native resolutions.

template <typename T>
Tensor<T> bilinear_resize(const Tensor<T>& x, std::size_t h2, std::size_t w2) {
  const Shape4 s = Shape4::of(x);
  if (s.h == h2 && s.w == w2) return x;
  Tensor<T> y({s.b, h2, w2, s.c});
  const T* px = x.data();
  T* py = y.data();
  const double sh = double(s.h) / double(h2);
  const double sw = double(s.w) / double(w2);
  for (std::size_t b = 0; b < s.b; ++b) {
    for (std::size_t i = 0; i < h2; ++i) {
      double fi = (double(i) + 0.5) * sh - 0.5;
      if (fi < 0) fi = 0;
      std::size_t i0 = std::size_t(fi);
      if (i0 > s.h - 1) i0 = s.h - 1;
      std::size_t i1 = i0 + 1 < s.h ? i0 + 1 : s.h - 1;
      const T wi = T(fi - double(i0));
      for (std::size_t j = 0; j < w2; ++j) {
        double fj = (double(j) + 0.5) * sw - 0.5;
        if (fj < 0) fj = 0;
        std::size_t j0 = std::size_t(fj);
        if (j0 > s.w - 1) j0 = s.w - 1;
        std::size_t j1 = j0 + 1 < s.w ? j0 + 1 : s.w - 1;
        const T wj = T(fj - double(j0));
        const T* p00 = px + ((b * s.h + i0) * s.w + j0) * s.c;
        const T* p01 = px + ((b * s.h + i0) * s.w + j1) * s.c;
        const T* p10 = px + ((b * s.h + i1) * s.w + j0) * s.c;
        const T* p11 = px + ((b * s.h + i1) * s.w + j1) * s.c;
        T* out = py + ((b * h2 + i) * w2 + j) * s.c;
        for (std::size_t ch = 0; ch < s.c; ++ch) {
          const T top = p00[ch] + wj * (p01[ch] - p00[ch]);
          const T bot = p10[ch] + wj * (p11[ch] - p10[ch]);
          out[ch] = top + wi * (bot - top);
        }
      }
    }
  }
  return y;
}

// ---------------------------------------------------------------------------
// Softmax cross-entropy with label smoothing. Returns the mean loss and
// writes d(loss)/d(logits) if requested.

template <typename T>
double softmax_xent(const Tensor<T>& logits, const std::vector<int>& labels,
                    double smoothing, Tensor<T>* grad_logits = nullptr) {
  if (logits.rank() != 2 || logits.extent(0) != labels.size())
    throw std::invalid_argument("softmax_xent expects [B,K] logits, one label per row");
  const std::size_t B = logits.extent(0), K = logits.extent(1);
  if (grad_logits) *grad_logits = Tensor<T>({B, K});
  const T* pl = logits.data();
  T* pg = grad_logits ? grad_logits->data() : nullptr;
  const double off = smoothing / double(K);
  const double on = 1.0 - smoothing + off;

  double loss = 0;
  std::vector<double> p(K);
  for (std::size_t b = 0; b < B; ++b) {
    const T* row = pl + b * K;
    double mx = row[0];
    for (std::size_t k = 1; k < K; ++k) mx = std::max(mx, double(row[k]));
    double z = 0;
    for (std::size_t k = 0; k < K; ++k) {
      p[k] = std::exp(double(row[k]) - mx);
      z += p[k];
    }
    const double logz = std::log(z) + mx;
    const int y = labels[b];
    if (y < 0 || std::size_t(y) >= K)
      throw std::invalid_argument("label out of range: " + std::to_string(y));
    double lb = 0;
    for (std::size_t k = 0; k < K; ++k) {
      const double q = (int(k) == y) ? on : off;
      lb += q * (logz - double(row[k]));
      if (pg) pg[b * K + k] = T((p[k] / z - q) / double(B));
    }
    loss += lb;
  }
  return loss / double(B);
}

}  // namespace vgru
