// Copyright 2026 The VisionGRU Authors. Apache 2.0 License.
//
// Kernels for the batched first-order affine recurrence
//
//   h_t = a_t * h_{t-1} + b_t        (elementwise over L independent lanes)
//
// scan_sequential is the plain left-to-right reference. scan_parallel
// evaluates the same prefixes with a work-efficient Blelloch tree over the
// time axis and is data-parallel over lanes. Pairs compose associatively:
//   (a1,b1) then (a2,b2)  ==  (a2*a1, a2*b1 + b2),  identity (1,0)
// so both kernels agree up to floating-point regrouping.

#pragma once

#include <utility>

#include "vgru/tensor.hpp"

namespace vgru {

// Test-only fault injection: flips a sign inside compose so that oracle
// suites can prove they would catch a broken operator.
bool scan_compose_fault();
void set_scan_compose_fault(bool on);

template <typename T>
struct ScanPair {
  Tensor<T> a;  // decay per step and lane, [T,L]
  Tensor<T> b;  // drive per step and lane, [T,L]

  std::size_t steps() const { return a.extent(0); }
  std::size_t lanes() const { return a.extent(1); }

  void validate() const {
    if (a.rank() != 2 || !a.same_shape(b))
      throw std::invalid_argument("scan pair tensors must share shape [T,L]: " +
                                  shape_str(a.shape()) + " vs " +
                                  shape_str(b.shape()));
  }
};

// compose(p, q): p applied first, then q.
template <typename T>
ScanPair<T> compose(const ScanPair<T>& p, const ScanPair<T>& q) {
  p.validate();
  q.validate();
  if (!p.a.same_shape(q.a))
    throw std::invalid_argument("compose shape mismatch");
  const bool fault = scan_compose_fault();
  ScanPair<T> r{Tensor<T>(p.a.shape()), Tensor<T>(p.b.shape())};
  const T* pa = p.a.data();
  const T* pb = p.b.data();
  const T* qa = q.a.data();
  const T* qb = q.b.data();
  T* ra = r.a.data();
  T* rb = r.b.data();
  for (std::size_t i = 0, n = p.a.numel(); i < n; ++i) {
    ra[i] = qa[i] * pa[i];
    rb[i] = fault ? qa[i] * pb[i] - qb[i] : qa[i] * pb[i] + qb[i];
  }
  return r;
}

template <typename T>
ScanPair<T> scan_identity(std::size_t steps, std::size_t lanes) {
  ScanPair<T> id{Tensor<T>({steps, lanes}), Tensor<T>({steps, lanes})};
  id.a.fill(T(1));
  return id;
}

// Reference kernel: exact left-to-right recurrence. h0 empty means zeros.
template <typename T>
Tensor<T> scan_sequential(const ScanPair<T>& pairs, const Tensor<T>& h0 = {}) {
  pairs.validate();
  const std::size_t steps = pairs.steps(), lanes = pairs.lanes();
  if (h0.numel() != 0 && (h0.rank() != 1 || h0.extent(0) != lanes))
    throw std::invalid_argument("h0 must be [L] or empty, got " +
                                shape_str(h0.shape()));
  Tensor<T> h({steps, lanes});
  const T* pa = pairs.a.data();
  const T* pb = pairs.b.data();
  T* ph = h.data();

  if (h0.numel() != 0) {
    const T* p0 = h0.data();
    for (std::size_t l = 0; l < lanes; ++l) ph[l] = pa[l] * p0[l] + pb[l];
  } else {
    for (std::size_t l = 0; l < lanes; ++l) ph[l] = pb[l];
  }
  for (std::size_t t = 1; t < steps; ++t) {
    const T* at = pa + t * lanes;
    const T* bt = pb + t * lanes;
    const T* hp = ph + (t - 1) * lanes;
    T* ht = ph + t * lanes;
    for (std::size_t l = 0; l < lanes; ++l) ht[l] = at[l] * hp[l] + bt[l];
  }
  return h;
}

namespace detail {
inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Reused per-caller scratch for the tree sweep. Growth is recorded in the
// allocation stats; the buffer is never shrunk, which keeps large repeated
// scans from paying page-fault churn on every call.
template <typename T>
std::vector<T>& scan_scratch(int which) {
  thread_local std::vector<T> bufs[2];
  return bufs[which];
}

template <typename T>
T* scratch_resized(int which, std::size_t n) {
  std::vector<T>& v = scan_scratch<T>(which);
  if (v.size() < n) {
    AllocStats::on_alloc(long long((n - v.size()) * sizeof(T)));
    v.resize(n);
  }
  return v.data();
}
}  // namespace detail

// Blelloch-style tree scan. Pads T to the next power of two with identity
// pairs (padding never alters real prefixes), runs the up/down sweep per
// lane block, then composes the exclusive prefix with each original pair:
//
//   (A_t, B_t) = prefix of pairs 1..t,   h_t = A_t * h0 + B_t
//
// Lanes are fully independent, so the result is bitwise identical for any
// worker count.
template <typename T>
Tensor<T> scan_parallel(const ScanPair<T>& pairs, const Tensor<T>& h0 = {}) {
  pairs.validate();
  const std::size_t steps = pairs.steps(), lanes = pairs.lanes();
  if (h0.numel() != 0 && (h0.rank() != 1 || h0.extent(0) != lanes))
    throw std::invalid_argument("h0 must be [L] or empty, got " +
                                shape_str(h0.shape()));
  const std::size_t n = detail::next_pow2(steps);
  const bool fault = scan_compose_fault();

  Tensor<T> h({steps, lanes});
  const T* pa = pairs.a.data();
  const T* pb = pairs.b.data();
  const T* p0 = h0.numel() ? h0.data() : nullptr;
  T* qa = detail::scratch_resized<T>(0, n * lanes);
  T* qb = detail::scratch_resized<T>(1, n * lanes);
  T* ph = h.data();

  parallel_for(lanes, 8, [&](std::size_t l0, std::size_t l1) {
    const std::size_t w = l1 - l0;
    // load real pairs, pad the tail with the identity (1,0)
    for (std::size_t t = 0; t < steps; ++t) {
      const std::size_t off = t * lanes + l0;
      for (std::size_t l = 0; l < w; ++l) qa[off + l] = pa[off + l];
      for (std::size_t l = 0; l < w; ++l) qb[off + l] = pb[off + l];
    }
    for (std::size_t t = steps; t < n; ++t) {
      const std::size_t off = t * lanes + l0;
      for (std::size_t l = 0; l < w; ++l) qa[off + l] = T(1);
      for (std::size_t l = 0; l < w; ++l) qb[off + l] = T(0);
    }

    // up-sweep: node i absorbs its left sibling i-d
    for (std::size_t d = 1; d < n; d <<= 1) {
      for (std::size_t i = 2 * d - 1; i < n; i += 2 * d) {
        const std::size_t ei = i * lanes + l0;
        const std::size_t ej = (i - d) * lanes + l0;
        for (std::size_t l = 0; l < w; ++l) {
          const T ai = qa[ei + l], bi = qb[ei + l];
          const T aj = qa[ej + l], bj = qb[ej + l];
          qa[ei + l] = ai * aj;
          qb[ei + l] = fault ? ai * bj - bi : ai * bj + bi;
        }
      }
    }

    // clear the root, then down-sweep exclusive prefixes
    {
      const std::size_t er = (n - 1) * lanes + l0;
      for (std::size_t l = 0; l < w; ++l) qa[er + l] = T(1);
      for (std::size_t l = 0; l < w; ++l) qb[er + l] = T(0);
    }
    std::vector<T> ta(w), tb(w);
    for (std::size_t d = n >> 1; d >= 1; d >>= 1) {
      for (std::size_t i = 2 * d - 1; i < n; i += 2 * d) {
        const std::size_t ei = i * lanes + l0;
        const std::size_t ej = (i - d) * lanes + l0;
        for (std::size_t l = 0; l < w; ++l) {
          ta[l] = qa[ej + l];
          tb[l] = qb[ej + l];
          qa[ej + l] = qa[ei + l];
          qb[ej + l] = qb[ei + l];
        }
        // right child prefix: incoming prefix, then old left subtree total
        for (std::size_t l = 0; l < w; ++l) {
          const T inc_a = qa[ej + l], inc_b = qb[ej + l];
          qa[ei + l] = ta[l] * inc_a;
          qb[ei + l] = fault ? ta[l] * inc_b - tb[l] : ta[l] * inc_b + tb[l];
        }
      }
    }

    // inclusive prefix = exclusive then own pair; apply to h0
    for (std::size_t t = 0; t < steps; ++t) {
      const std::size_t off = t * lanes + l0;
      for (std::size_t l = 0; l < w; ++l) {
        const T ea = qa[off + l], eb = qb[off + l];
        const T oa = pa[off + l], ob = pb[off + l];
        const T inc_a = oa * ea;
        const T inc_b = fault ? oa * eb - ob : oa * eb + ob;
        ph[off + l] = p0 ? inc_a * p0[l0 + l] + inc_b : inc_b;
      }
    }
  });
  check_finite(h, "scan_parallel");
  return h;
}

}  // namespace vgru
