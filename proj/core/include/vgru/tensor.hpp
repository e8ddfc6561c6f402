// Copyright 2026 The VisionGRU Authors. Apache 2.0 License.
//
// Dense row-major N-d tensor of real scalars. Scalar type is a template
// parameter: float for speed, double for verification runs. All operations
// are pure functions with a fixed summation order per output element, so
// repeated evaluation is bit-identical at either precision and independent
// of the worker count.

#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vgru/parallel.hpp"

namespace vgru {

// ---------------------------------------------------------------------------
// Allocation accounting, used for the "peak workspace bytes" bench column.

struct AllocStats {
  static std::atomic<long long> current;
  static std::atomic<long long> peak;

  static void on_alloc(long long bytes) {
    long long cur = current.fetch_add(bytes) + bytes;
    long long p = peak.load();
    while (cur > p && !peak.compare_exchange_weak(p, cur)) {
    }
  }
  static void on_free(long long bytes) { current.fetch_sub(bytes); }
  static void reset_peak() { peak.store(current.load()); }
};

// Finite-value checks after module-level ops; enabled in verification mode.
bool finite_checks_enabled();
void set_finite_checks(bool on);

inline std::string shape_str(const std::vector<std::size_t>& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
  os << ']';
  return os.str();
}

// ---------------------------------------------------------------------------

template <typename T>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
    std::size_t n = 1;
    for (std::size_t e : shape_) {
      if (e == 0) throw std::invalid_argument("tensor extent must be >= 1");
      n *= e;
    }
    data_.assign(n, T(0));
    AllocStats::on_alloc(bytes());
  }

  Tensor(std::initializer_list<std::size_t> shape)
      : Tensor(std::vector<std::size_t>(shape)) {}

  Tensor(const Tensor& o) : shape_(o.shape_), data_(o.data_) {
    AllocStats::on_alloc(bytes());
  }
  Tensor(Tensor&& o) noexcept : shape_(std::move(o.shape_)), data_(std::move(o.data_)) {
    o.shape_.clear();
  }
  Tensor& operator=(const Tensor& o) {
    if (this != &o) {
      AllocStats::on_free(bytes());
      shape_ = o.shape_;
      data_ = o.data_;
      AllocStats::on_alloc(bytes());
    }
    return *this;
  }
  Tensor& operator=(Tensor&& o) noexcept {
    if (this != &o) {
      AllocStats::on_free(bytes());
      shape_ = std::move(o.shape_);
      data_ = std::move(o.data_);
      o.shape_.clear();
    }
    return *this;
  }
  ~Tensor() { AllocStats::on_free(bytes()); }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t extent(std::size_t i) const { return shape_.at(i); }
  std::size_t numel() const { return data_.size(); }
  long long bytes() const {
    return static_cast<long long>(data_.size() * sizeof(T));
  }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  // Multi-index access, mostly for tests and small oracles.
  T& at(std::initializer_list<std::size_t> idx) { return data_[offset(idx)]; }
  const T& at(std::initializer_list<std::size_t> idx) const {
    return data_[offset(idx)];
  }

  void fill(T v) {
    for (auto& x : data_) x = v;
  }

  // Same data, new logical shape; element count must match.
  Tensor reshaped(std::vector<std::size_t> shape) const& {
    Tensor r = *this;
    r.set_shape(std::move(shape));
    return r;
  }
  Tensor reshaped(std::vector<std::size_t> shape) && {
    set_shape(std::move(shape));
    return std::move(*this);
  }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

 private:
  void set_shape(std::vector<std::size_t> shape) {
    std::size_t n = 1;
    for (std::size_t e : shape) n *= e;
    if (n != data_.size())
      throw std::invalid_argument("reshape changes element count: " +
                                  shape_str(shape_) + " -> " + shape_str(shape));
    shape_ = std::move(shape);
  }

  std::size_t offset(std::initializer_list<std::size_t> idx) const {
    std::size_t off = 0, d = 0;
    for (std::size_t i : idx) {
      off = off * shape_[d] + i;
      ++d;
    }
    return off;
  }

  std::vector<std::size_t> shape_;
  std::vector<T> data_;
};

// Batched channels-last layout shared by every spatial module.
struct Shape4 {
  std::size_t b, h, w, c;

  std::vector<std::size_t> dims() const { return {b, h, w, c}; }
  std::size_t numel() const { return b * h * w * c; }

  template <typename T>
  static Shape4 of(const Tensor<T>& t) {
    if (t.rank() != 4)
      throw std::invalid_argument("expected rank-4 tensor, got " +
                                  shape_str(t.shape()));
    return Shape4{t.extent(0), t.extent(1), t.extent(2), t.extent(3)};
  }
};

template <typename T>
void check_finite(const Tensor<T>& t, const char* what) {
  if (!finite_checks_enabled()) return;
  for (std::size_t i = 0; i < t.numel(); ++i) {
    if (!std::isfinite(t[i])) {
      throw std::runtime_error(std::string("non-finite value in ") + what +
                               " at flat index " + std::to_string(i));
    }
  }
}

// ---------------------------------------------------------------------------
// Elementwise helpers

template <typename T, typename F>
Tensor<T> map(const Tensor<T>& x, F f) {
  Tensor<T> y(x.shape());
  const T* in = x.data();
  T* out = y.data();
  for (std::size_t i = 0, n = x.numel(); i < n; ++i) out[i] = f(in[i]);
  return y;
}

template <typename T, typename F>
Tensor<T> zip(const Tensor<T>& a, const Tensor<T>& b, F f) {
  if (!a.same_shape(b))
    throw std::invalid_argument("elementwise shape mismatch: " +
                                shape_str(a.shape()) + " vs " +
                                shape_str(b.shape()));
  Tensor<T> y(a.shape());
  const T* pa = a.data();
  const T* pb = b.data();
  T* out = y.data();
  for (std::size_t i = 0, n = a.numel(); i < n; ++i) out[i] = f(pa[i], pb[i]);
  return y;
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  return zip(a, b, [](T x, T y) { return x + y; });
}
template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  return zip(a, b, [](T x, T y) { return x - y; });
}
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  return zip(a, b, [](T x, T y) { return x * y; });
}

template <typename T>
void add_inplace(Tensor<T>& a, const Tensor<T>& b) {
  if (!a.same_shape(b))
    throw std::invalid_argument("elementwise shape mismatch: " +
                                shape_str(a.shape()) + " vs " +
                                shape_str(b.shape()));
  T* pa = a.data();
  const T* pb = b.data();
  for (std::size_t i = 0, n = a.numel(); i < n; ++i) pa[i] += pb[i];
}

template <typename T>
void scale_inplace(Tensor<T>& a, T s) {
  T* p = a.data();
  for (std::size_t i = 0, n = a.numel(); i < n; ++i) p[i] *= s;
}

template <typename T>
T max_abs(const Tensor<T>& a) {
  T m = 0;
  for (std::size_t i = 0, n = a.numel(); i < n; ++i) {
    T v = std::abs(a[i]);
    if (v > m) m = v;
  }
  return m;
}

// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor)
template <typename T>
double max_rel_diff(const Tensor<T>& a, const Tensor<T>& b,
                    double floor = 1e-12) {
  if (!a.same_shape(b))
    throw std::invalid_argument("rel-diff shape mismatch: " +
                                shape_str(a.shape()) + " vs " +
                                shape_str(b.shape()));
  double worst = 0;
  for (std::size_t i = 0, n = a.numel(); i < n; ++i) {
    double x = a[i], y = b[i];
    double denom = std::max({std::abs(x), std::abs(y), floor});
    double d = std::abs(x - y) / denom;
    if (d > worst) worst = d;
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Matrix products. Accumulation is always over ascending k, one output
// element per (row, col), so every variant agrees bit-for-bit with the naive
// triple loop at the same precision.

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.extent(1) != b.extent(0))
    throw std::invalid_argument("matmul shape mismatch: " +
                                shape_str(a.shape()) + " * " +
                                shape_str(b.shape()));
  const std::size_t m = a.extent(0), k = a.extent(1), n = b.extent(1);
  Tensor<T> c({m, n});
  const T* pa = a.data();
  const T* pb = b.data();
  T* pc = c.data();
  parallel_for(m, 16, [&](std::size_t r0, std::size_t r1) {
    for (std::size_t i = r0; i < r1; ++i) {
      T* crow = pc + i * n;
      const T* arow = pa + i * k;
      for (std::size_t kk = 0; kk < k; ++kk) {
        const T aik = arow[kk];
        const T* brow = pb + kk * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
      }
    }
  });
  return c;
}

// y = x * w + bias, x: [m,k], w: [k,n], bias: [n]
template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias) {
  if (x.rank() != 2 || w.rank() != 2 || x.extent(1) != w.extent(0) ||
      bias.rank() != 1 || bias.extent(0) != w.extent(1))
    throw std::invalid_argument("linear shape mismatch: " +
                                shape_str(x.shape()) + " * " +
                                shape_str(w.shape()) + " + " +
                                shape_str(bias.shape()));
  const std::size_t m = x.extent(0), k = x.extent(1), n = w.extent(1);
  Tensor<T> y({m, n});
  const T* px = x.data();
  const T* pw = w.data();
  const T* pbias = bias.data();
  T* py = y.data();
  parallel_for(m, 16, [&](std::size_t r0, std::size_t r1) {
    for (std::size_t i = r0; i < r1; ++i) {
      T* yrow = py + i * n;
      for (std::size_t j = 0; j < n; ++j) yrow[j] = pbias[j];
      const T* xrow = px + i * k;
      for (std::size_t kk = 0; kk < k; ++kk) {
        const T xik = xrow[kk];
        const T* wrow = pw + kk * n;
        for (std::size_t j = 0; j < n; ++j) yrow[j] += xik * wrow[j];
      }
    }
  });
  return y;
}

// a^T * b, a: [k,m], b: [k,n] -> [m,n]. Used for weight gradients.
template <typename T>
Tensor<T> matmul_tn(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.extent(0) != b.extent(0))
    throw std::invalid_argument("matmul_tn shape mismatch: " +
                                shape_str(a.shape()) + " , " +
                                shape_str(b.shape()));
  const std::size_t k = a.extent(0), m = a.extent(1), n = b.extent(1);
  Tensor<T> c({m, n});
  const T* pa = a.data();
  const T* pb = b.data();
  T* pc = c.data();
  parallel_for(m, 8, [&](std::size_t r0, std::size_t r1) {
    for (std::size_t i = r0; i < r1; ++i) {
      T* crow = pc + i * n;
      for (std::size_t kk = 0; kk < k; ++kk) {
        const T aki = pa[kk * m + i];
        const T* brow = pb + kk * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += aki * brow[j];
      }
    }
  });
  return c;
}

// a * b^T, a: [m,k], b: [n,k] -> [m,n]. Used for input gradients.
template <typename T>
Tensor<T> matmul_nt(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.extent(1) != b.extent(1))
    throw std::invalid_argument("matmul_nt shape mismatch: " +
                                shape_str(a.shape()) + " , " +
                                shape_str(b.shape()));
  const std::size_t m = a.extent(0), k = a.extent(1), n = b.extent(0);
  Tensor<T> c({m, n});
  const T* pa = a.data();
  const T* pb = b.data();
  T* pc = c.data();
  parallel_for(m, 16, [&](std::size_t r0, std::size_t r1) {
    for (std::size_t i = r0; i < r1; ++i) {
      const T* arow = pa + i * k;
      T* crow = pc + i * n;
      for (std::size_t j = 0; j < n; ++j) {
        const T* brow = pb + j * k;
        T acc = 0;
        for (std::size_t kk = 0; kk < k; ++kk) acc += arow[kk] * brow[kk];
        crow[j] = acc;
      }
    }
  });
  return c;
}

// Column sums of a [m,n] matrix -> [n]. Ascending-row accumulation.
template <typename T>
Tensor<T> col_sum(const Tensor<T>& a) {
  if (a.rank() != 2)
    throw std::invalid_argument("col_sum expects rank-2, got " +
                                shape_str(a.shape()));
  const std::size_t m = a.extent(0), n = a.extent(1);
  Tensor<T> s({n});
  const T* pa = a.data();
  T* ps = s.data();
  parallel_for(n, 64, [&](std::size_t c0, std::size_t c1) {
    for (std::size_t j = c0; j < c1; ++j) {
      T acc = 0;
      for (std::size_t i = 0; i < m; ++i) acc += pa[i * n + j];
      ps[j] = acc;
    }
  });
  return s;
}

}  // namespace vgru
