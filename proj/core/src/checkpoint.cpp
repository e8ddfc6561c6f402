// Copyright 2026 The VisionGRU Authors. Apache 2.0 License.

#include "vgru/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace vgru {

static_assert(std::endian::native == std::endian::little,
              "checkpoint codec assumes a little-endian host");

namespace {

void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), 4);
}
void write_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), 8);
}
std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), 4))
    throw std::runtime_error("checkpoint truncated while reading u32");
  return v;
}
std::uint64_t read_u64(std::istream& is) {
  std::uint64_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), 8))
    throw std::runtime_error("checkpoint truncated while reading u64");
  return v;
}

constexpr char kMagic[4] = {'V', 'G', 'R', 'U'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

template <typename T>
void Checkpoint::encode(const T* src, std::size_t n, std::uint8_t* dst) {
  std::memcpy(dst, src, n * sizeof(T));
}

template <typename T>
void Checkpoint::decode(const std::uint8_t* src, std::size_t n, T* dst) {
  std::memcpy(dst, src, n * sizeof(T));
}

template void Checkpoint::encode<float>(const float*, std::size_t, std::uint8_t*);
template void Checkpoint::encode<double>(const double*, std::size_t, std::uint8_t*);
template void Checkpoint::encode<std::int64_t>(const std::int64_t*, std::size_t, std::uint8_t*);
template void Checkpoint::decode<float>(const std::uint8_t*, std::size_t, float*);
template void Checkpoint::decode<double>(const std::uint8_t*, std::size_t, double*);
template void Checkpoint::decode<std::int64_t>(const std::uint8_t*, std::size_t, std::int64_t*);

std::vector<std::string> Checkpoint::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [k, v] : entries_) out.push_back(k);
  return out;
}

const CheckpointEntry& Checkpoint::find(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end())
    throw std::runtime_error("checkpoint has no tensor named '" + name + "'");
  return it->second;
}

std::int64_t Checkpoint::get_i64(const std::string& name) const {
  const CheckpointEntry& e = find(name);
  if (e.dtype != Dtype::i64 || e.bytes.size() != 8)
    throw std::runtime_error("checkpoint entry '" + name + "' is not a scalar i64");
  std::int64_t v;
  std::memcpy(&v, e.bytes.data(), 8);
  return v;
}

double Checkpoint::get_f64(const std::string& name) const {
  const CheckpointEntry& e = find(name);
  if (e.dtype != Dtype::f64 || e.bytes.size() != 8)
    throw std::runtime_error("checkpoint entry '" + name + "' is not a scalar f64");
  double v;
  std::memcpy(&v, e.bytes.data(), 8);
  return v;
}

void Checkpoint::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  os.write(kMagic, 4);
  write_u32(os, kVersion);
  write_u64(os, entries_.size());

  std::uint64_t offset = 0;
  for (const auto& [name, e] : entries_) {
    write_u32(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    const std::uint8_t code = static_cast<std::uint8_t>(e.dtype);
    os.write(reinterpret_cast<const char*>(&code), 1);
    write_u32(os, static_cast<std::uint32_t>(e.dims.size()));
    for (std::size_t d : e.dims) write_u64(os, d);
    write_u64(os, offset);
    offset += e.bytes.size();
  }
  write_u64(os, offset);
  for (const auto& [name, e] : entries_) {
    os.write(reinterpret_cast<const char*>(e.bytes.data()),
             static_cast<std::streamsize>(e.bytes.size()));
  }
  if (!os) throw std::runtime_error("write failed for checkpoint: " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("not a VGRU checkpoint: " + path);
  const std::uint32_t version = read_u32(is);
  if (version != kVersion)
    throw std::runtime_error("unsupported checkpoint version " +
                             std::to_string(version));
  const std::uint64_t count = read_u64(is);

  struct Pending {
    std::string name;
    Dtype dtype;
    std::vector<std::size_t> dims;
    std::uint64_t offset;
    std::uint64_t bytes;
  };
  std::vector<Pending> table;
  table.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    Pending p;
    const std::uint32_t len = read_u32(is);
    p.name.resize(len);
    if (!is.read(p.name.data(), len))
      throw std::runtime_error("checkpoint truncated in tensor table");
    std::uint8_t code;
    if (!is.read(reinterpret_cast<char*>(&code), 1))
      throw std::runtime_error("checkpoint truncated in tensor table");
    if (code < 1 || code > 3)
      throw std::runtime_error("bad dtype code in checkpoint: " +
                               std::to_string(code));
    p.dtype = static_cast<Dtype>(code);
    const std::uint32_t rank = read_u32(is);
    std::uint64_t numel = 1;
    p.dims.resize(rank);
    for (std::uint32_t d = 0; d < rank; ++d) {
      p.dims[d] = read_u64(is);
      numel *= p.dims[d];
    }
    p.offset = read_u64(is);
    p.bytes = numel * dtype_size(p.dtype);
    table.push_back(std::move(p));
  }
  const std::uint64_t payload = read_u64(is);
  std::vector<std::uint8_t> blob(payload);
  if (payload && !is.read(reinterpret_cast<char*>(blob.data()),
                          static_cast<std::streamsize>(payload)))
    throw std::runtime_error("checkpoint payload truncated: " + path);

  Checkpoint out;
  for (auto& p : table) {
    if (p.offset + p.bytes > payload)
      throw std::runtime_error("tensor '" + p.name +
                               "' extends past the checkpoint payload");
    CheckpointEntry e;
    e.dtype = p.dtype;
    e.dims = std::move(p.dims);
    e.bytes.assign(blob.begin() + std::ptrdiff_t(p.offset),
                   blob.begin() + std::ptrdiff_t(p.offset + p.bytes));
    out.entries_[p.name] = std::move(e);
  }
  return out;
}

}  // namespace vgru
