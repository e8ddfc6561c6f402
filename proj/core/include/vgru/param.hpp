// Copyright 2026 The VisionGRU Authors. Apache 2.0 License.

#pragma once

#include <string>
#include <vector>

#include "vgru/rng.hpp"
#include "vgru/tensor.hpp"

namespace vgru {

// A learnable tensor and its gradient accumulator. Gradients are zeroed by
// the training step, never implicitly.
template <typename T>
struct Param {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;

  void setup(std::string n, std::vector<std::size_t> shape) {
    name = std::move(n);
    value = Tensor<T>(shape);
    grad = Tensor<T>(std::move(shape));
  }

  void zero_grad() { grad.fill(T(0)); }
  std::size_t numel() const { return value.numel(); }
};

// Uniform fill in [-bound, bound]; draws are made in a fixed flat order so
// initialization is reproducible across runs and worker counts.
template <typename T>
void init_uniform(Param<T>& p, double bound, Rng& rng) {
  T* d = p.value.data();
  for (std::size_t i = 0, n = p.value.numel(); i < n; ++i)
    d[i] = T(rng.uniform(-bound, bound));
}

}  // namespace vgru
