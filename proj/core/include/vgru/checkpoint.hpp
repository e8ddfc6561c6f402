// Copyright 2026 The VisionGRU Authors. Apache 2.0 License.
//
// Named-tensor archive. Layout, all integers little-endian:
//
//   magic "VGRU" | u32 version | u64 tensor count
//   per tensor:  u32 name length | name bytes | u8 dtype | u32 rank |
//                u64 extents[rank] | u64 byte offset into payload
//   u64 payload size | raw scalar payload
//
// dtype codes: 1 = f32, 2 = f64, 3 = i64. Round-trips are bitwise exact,
// which is what makes training resumption reproduce the original run.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vgru/tensor.hpp"

namespace vgru {

enum class Dtype : std::uint8_t { f32 = 1, f64 = 2, i64 = 3 };

template <typename T>
constexpr Dtype dtype_of();
template <>
constexpr Dtype dtype_of<float>() { return Dtype::f32; }
template <>
constexpr Dtype dtype_of<double>() { return Dtype::f64; }
template <>
constexpr Dtype dtype_of<std::int64_t>() { return Dtype::i64; }

inline std::size_t dtype_size(Dtype d) {
  switch (d) {
    case Dtype::f32: return 4;
    case Dtype::f64: return 8;
    case Dtype::i64: return 8;
  }
  throw std::invalid_argument("bad dtype code");
}

struct CheckpointEntry {
  Dtype dtype;
  std::vector<std::size_t> dims;
  std::vector<std::uint8_t> bytes;
};

class Checkpoint {
 public:
  template <typename T>
  void put(const std::string& name, const Tensor<T>& t) {
    CheckpointEntry e;
    e.dtype = dtype_of<T>();
    e.dims = t.shape();
    e.bytes.resize(t.numel() * sizeof(T));
    encode(t.data(), t.numel(), e.bytes.data());
    entries_[name] = std::move(e);
  }

  void put_i64(const std::string& name, std::int64_t v) {
    CheckpointEntry e;
    e.dtype = Dtype::i64;
    e.dims = {1};
    e.bytes.resize(8);
    encode(&v, 1, e.bytes.data());
    entries_[name] = std::move(e);
  }

  void put_f64(const std::string& name, double v) {
    CheckpointEntry e;
    e.dtype = Dtype::f64;
    e.dims = {1};
    e.bytes.resize(8);
    encode(&v, 1, e.bytes.data());
    entries_[name] = std::move(e);
  }

  bool has(const std::string& name) const { return entries_.count(name) != 0; }
  std::vector<std::string> names() const;

  template <typename T>
  Tensor<T> get(const std::string& name) const {
    const CheckpointEntry& e = find(name);
    if (e.dtype != dtype_of<T>())
      throw std::runtime_error("checkpoint tensor '" + name +
                               "' has a different scalar type");
    Tensor<T> t(e.dims);
    decode(e.bytes.data(), t.numel(), t.data());
    return t;
  }

  std::int64_t get_i64(const std::string& name) const;
  double get_f64(const std::string& name) const;

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);

  std::size_t size() const { return entries_.size(); }

 private:
  const CheckpointEntry& find(const std::string& name) const;

  template <typename T>
  static void encode(const T* src, std::size_t n, std::uint8_t* dst);
  template <typename T>
  static void decode(const std::uint8_t* src, std::size_t n, T* dst);

  // map keeps the on-disk table order deterministic
  std::map<std::string, CheckpointEntry> entries_;
};

}  // namespace vgru
