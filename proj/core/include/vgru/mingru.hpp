// Copyright 2026 The VisionGRU Authors. Apache 2.0 License.
//
// The minGRU cell:
//
//   z_t = sigmoid(x_t W_z + c_z)         update gate
//   g_t = x_t W_h + c_h                  candidate state (no tanh)
//   h_t = (1 - z_t) .* h_{t-1} + z_t .* g_t
//
// Gate and candidate depend only on the current input, so the whole
// sequence reduces to an affine scan with pairs (1 - z_t, z_t .* g_t) and
// evaluates in parallel. The adjoint of that scan is itself a reversed
// affine scan reusing the decay coefficients, which keeps the backward
// pass O(T) as well.

#pragma once

#include "vgru/nn.hpp"
#include "vgru/param.hpp"
#include "vgru/scan.hpp"

namespace vgru {

template <typename T>
struct MinGRUCell {
  Param<T> w_z, b_z;  // update-gate linear map
  Param<T> w_h, b_h;  // candidate linear map
  std::size_t c_in = 0, c_h = 0;

  void setup(const std::string& prefix, std::size_t in, std::size_t hidden) {
    c_in = in;
    c_h = hidden;
    w_z.setup(prefix + ".wz", {in, hidden});
    b_z.setup(prefix + ".bz", {hidden});
    w_h.setup(prefix + ".wh", {in, hidden});
    b_h.setup(prefix + ".bh", {hidden});
  }

  void init(Rng& rng) {
    const double bound = std::sqrt(1.0 / double(c_in));
    init_uniform(w_z, bound, rng);
    init_uniform(w_h, bound, rng);
    // biases start at zero: gates open halfway
  }

  void collect(std::vector<Param<T>*>& out) {
    out.push_back(&w_z);
    out.push_back(&b_z);
    out.push_back(&w_h);
    out.push_back(&b_h);
  }

  static std::size_t param_count(std::size_t in, std::size_t hidden) {
    return 2 * (in * hidden + hidden);
  }
};

// Saved forward activations, enough for an exact backward pass.
template <typename T>
struct MinGRUCache {
  Tensor<T> x;      // [T,B,Cin]
  Tensor<T> z;      // [T,B,Ch]
  Tensor<T> hcand;  // [T,B,Ch]
  Tensor<T> h;      // [T,B,Ch]
};

// x: [T,B,Cin] -> h: [T,B,Ch]. Initial hidden state is the zero vector.
template <typename T>
Tensor<T> mingru_forward(const MinGRUCell<T>& cell, const Tensor<T>& x,
                         MinGRUCache<T>* cache = nullptr) {
  if (x.rank() != 3 || x.extent(2) != cell.c_in)
    throw std::invalid_argument("mingru_forward expects [T,B,Cin] with Cin=" +
                                std::to_string(cell.c_in) + ", got " +
                                shape_str(x.shape()));
  const std::size_t steps = x.extent(0), batch = x.extent(1);
  const std::size_t lanes = batch * cell.c_h;

  Tensor<T> x_flat = x.reshaped({steps * batch, cell.c_in});
  Tensor<T> z = sigmoid(linear(x_flat, cell.w_z.value, cell.b_z.value));
  Tensor<T> hcand = linear(x_flat, cell.w_h.value, cell.b_h.value);

  ScanPair<T> pairs{Tensor<T>({steps, lanes}), Tensor<T>({steps, lanes})};
  {
    const T* pz = z.data();
    const T* pg = hcand.data();
    T* pa = pairs.a.data();
    T* pb = pairs.b.data();
    for (std::size_t i = 0, n = steps * lanes; i < n; ++i) {
      pa[i] = T(1) - pz[i];
      pb[i] = pz[i] * pg[i];
    }
  }
  Tensor<T> h = scan_parallel(pairs).reshaped({steps, batch, cell.c_h});

  if (cache) {
    cache->x = x;
    cache->z = std::move(z).reshaped({steps, batch, cell.c_h});
    cache->hcand = std::move(hcand).reshaped({steps, batch, cell.c_h});
    cache->h = h;
  }
  return h;
}

// Accumulates parameter gradients into the cell and returns grad wrt x.
template <typename T>
Tensor<T> mingru_backward(MinGRUCell<T>& cell, const MinGRUCache<T>& cache,
                          const Tensor<T>& grad_h) {
  const std::size_t steps = cache.x.extent(0), batch = cache.x.extent(1);
  const std::size_t lanes = batch * cell.c_h;
  if (!grad_h.same_shape(cache.h))
    throw std::invalid_argument("mingru_backward grad shape mismatch: " +
                                shape_str(grad_h.shape()) + " vs " +
                                shape_str(cache.h.shape()));

  // Adjoint recurrence gbar_t = grad_t + (1 - z_{t+1}) * gbar_{t+1},
  // evaluated as a forward scan over reversed time.
  ScanPair<T> rev{Tensor<T>({steps, lanes}), Tensor<T>({steps, lanes})};
  {
    const T* pz = cache.z.data();
    const T* pg = grad_h.data();
    T* pa = rev.a.data();
    T* pb = rev.b.data();
    for (std::size_t s = 0; s < steps; ++s) {
      const std::size_t t = steps - 1 - s;
      T* as = pa + s * lanes;
      T* bs = pb + s * lanes;
      const T* gt = pg + t * lanes;
      if (s == 0) {
        // first reversed step starts from zero state; decay unused
        for (std::size_t l = 0; l < lanes; ++l) as[l] = T(1);
      } else {
        const T* znext = pz + (t + 1) * lanes;
        for (std::size_t l = 0; l < lanes; ++l) as[l] = T(1) - znext[l];
      }
      for (std::size_t l = 0; l < lanes; ++l) bs[l] = gt[l];
    }
  }
  Tensor<T> gbar_rev = scan_parallel(rev);

  // Local gradients: dz = gbar*(g - h_prev), dg = gbar*z, through the
  // sigmoid for the gate pre-activation.
  Tensor<T> dpre_z({steps * batch, cell.c_h});
  Tensor<T> dpre_h({steps * batch, cell.c_h});
  {
    const T* pgb = gbar_rev.data();
    const T* pz = cache.z.data();
    const T* pg = cache.hcand.data();
    const T* ph = cache.h.data();
    T* pz_out = dpre_z.data();
    T* ph_out = dpre_h.data();
    for (std::size_t t = 0; t < steps; ++t) {
      const std::size_t s = steps - 1 - t;  // gbar stored in reversed order
      const T* gb = pgb + s * lanes;
      const T* zt = pz + t * lanes;
      const T* gt = pg + t * lanes;
      const T* hprev = t == 0 ? nullptr : ph + (t - 1) * lanes;
      T* oz = pz_out + t * lanes;
      T* oh = ph_out + t * lanes;
      for (std::size_t l = 0; l < lanes; ++l) {
        const T hp = hprev ? hprev[l] : T(0);
        const T dz = gb[l] * (gt[l] - hp);
        oz[l] = dz * zt[l] * (T(1) - zt[l]);
        oh[l] = gb[l] * zt[l];
      }
    }
  }

  Tensor<T> x_flat = cache.x.reshaped({steps * batch, cell.c_in});
  add_inplace(cell.w_z.grad, matmul_tn(x_flat, dpre_z));
  add_inplace(cell.b_z.grad, col_sum(dpre_z));
  add_inplace(cell.w_h.grad, matmul_tn(x_flat, dpre_h));
  add_inplace(cell.b_h.grad, col_sum(dpre_h));

  Tensor<T> grad_x = matmul_nt(dpre_z, cell.w_z.value);
  add_inplace(grad_x, matmul_nt(dpre_h, cell.w_h.value));
  return std::move(grad_x).reshaped({steps, batch, cell.c_in});
}

}  // namespace vgru
