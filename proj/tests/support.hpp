// Copyright 2026 The VisionGRU Authors. Apache 2.0 License.
//
// Shared test helpers, including the naive-loop oracles the tensor ops are
// checked against. The oracles deliberately use their own plain loops and
// never call into the code they verify.

#pragma once

#include <filesystem>
#include <fstream>

#include "vgru/backbone.hpp"
#include "vgru/rng.hpp"
#include "vgru/tensor.hpp"

namespace vgru_test {

using namespace vgru;

template <typename T>
Tensor<T> random_tensor(std::vector<std::size_t> shape, Rng& rng, double lo = -1,
                        double hi = 1) {
  Tensor<T> t(std::move(shape));
  for (std::size_t i = 0; i < t.numel(); ++i) t[i] = T(rng.uniform(lo, hi));
  return t;
}

// naive triple loop, fixed i,j,k order
template <typename T>
Tensor<T> oracle_matmul(const Tensor<T>& a, const Tensor<T>& b) {
  const std::size_t m = a.extent(0), k = a.extent(1), n = b.extent(1);
  Tensor<T> c({m, n});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      T acc = 0;
      for (std::size_t kk = 0; kk < k; ++kk)
        acc += a[i * k + kk] * b[kk * n + j];
      c[i * n + j] = acc;
    }
  return c;
}

// two-pass mean/variance per trailing-axis row
template <typename T>
Tensor<T> oracle_layer_norm(const Tensor<T>& x, const Tensor<T>& g,
                            const Tensor<T>& b, T eps) {
  const std::size_t c = x.extent(x.rank() - 1), rows = x.numel() / c;
  Tensor<T> y(x.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    T mean = 0;
    for (std::size_t i = 0; i < c; ++i) mean += x[r * c + i];
    mean /= T(c);
    T var = 0;
    for (std::size_t i = 0; i < c; ++i)
      var += (x[r * c + i] - mean) * (x[r * c + i] - mean);
    var /= T(c);
    for (std::size_t i = 0; i < c; ++i)
      y[r * c + i] = g[i] * (x[r * c + i] - mean) / std::sqrt(var + eps) + b[i];
  }
  return y;
}

// direct 6-loop depthwise convolution with zero padding
template <typename T>
Tensor<T> oracle_dwconv(const Tensor<T>& x, const Tensor<T>& k,
                        const Tensor<T>& bias) {
  const std::size_t B = x.extent(0), H = x.extent(1), W = x.extent(2),
                    C = x.extent(3), K = k.extent(0);
  const std::ptrdiff_t P = std::ptrdiff_t((K - 1) / 2);
  Tensor<T> y(x.shape());
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t i = 0; i < H; ++i)
      for (std::size_t j = 0; j < W; ++j)
        for (std::size_t c = 0; c < C; ++c) {
          T acc = bias[c];
          for (std::size_t u = 0; u < K; ++u)
            for (std::size_t v = 0; v < K; ++v) {
              const std::ptrdiff_t ii = std::ptrdiff_t(i + u) - P;
              const std::ptrdiff_t jj = std::ptrdiff_t(j + v) - P;
              if (ii < 0 || ii >= std::ptrdiff_t(H) || jj < 0 ||
                  jj >= std::ptrdiff_t(W))
                continue;
              acc += k[(u * K + v) * C + c] *
                     x[((b * H + std::size_t(ii)) * W + std::size_t(jj)) * C + c];
            }
          y[((b * H + i) * W + j) * C + c] = acc;
        }
  return y;
}

template <typename T>
Tensor<T> oracle_avg_pool(const Tensor<T>& x) {
  const std::size_t B = x.extent(0), H = x.extent(1), W = x.extent(2),
                    C = x.extent(3);
  Tensor<T> y({B, C});
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c) {
      T acc = 0;
      for (std::size_t i = 0; i < H; ++i)
        for (std::size_t j = 0; j < W; ++j)
          acc += x[((b * H + i) * W + j) * C + c];
      y[b * C + c] = acc / T(H * W);
    }
  return y;
}

inline std::string temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("vgru_test_" + name);
  std::filesystem::create_directories(p);
  return p.string();
}

// Synthetic learnable dataset in the CIFAR-10 binary record layout: each
// class has a fixed random base pattern, samples add bounded pixel noise.
// Classes cycle 0,1,2,... so splits are exactly balanced.
inline void write_synthetic_cifar(const std::string& path, std::size_t count,
                                  std::uint64_t seed, int classes = 10) {
  std::vector<std::vector<std::uint8_t>> base(classes);
  for (int k = 0; k < classes; ++k) {
    Rng rng = stream(seed, "synth.class", std::uint64_t(k));
    base[k].resize(3072);
    for (auto& px : base[k]) px = std::uint8_t(40 + rng.below(176));
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path);
  Rng noise = stream(seed, "synth.noise");
  for (std::size_t i = 0; i < count; ++i) {
    const int k = int(i % std::size_t(classes));
    os.put(char(k));
    for (std::size_t p = 0; p < 3072; ++p) {
      int v = int(base[k][p]) + int(noise.below(61)) - 30;
      if (v < 0) v = 0;
      if (v > 255) v = 255;
      os.put(char(v));
    }
  }
}

}  // namespace vgru_test
