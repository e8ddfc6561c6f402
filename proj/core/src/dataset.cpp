// Copyright 2026 The VisionGRU Authors. Apache 2.0 License.

#include "vgru/dataset.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

namespace vgru {

namespace fs = std::filesystem;

void ingest_cifar10_file(const std::string& path, LabeledImages& out) {
  std::ifstream is(path, std::ios::binary | std::ios::ate);
  if (!is) throw DataError("cannot open dataset file: " + path);
  const std::uint64_t size = std::uint64_t(is.tellg());
  is.seekg(0);
  if (size % kCifarRecord != 0) {
    const std::uint64_t offset = (size / kCifarRecord) * kCifarRecord;
    throw DataError("truncated record in " + path + " at byte offset " +
                    std::to_string(offset) + " (file size " +
                    std::to_string(size) + ", record size " +
                    std::to_string(kCifarRecord) + ")");
  }
  const std::size_t records = size / kCifarRecord;
  std::vector<std::uint8_t> buf(kCifarRecord);
  out.labels.reserve(out.labels.size() + records);
  out.pixels.reserve(out.pixels.size() + records * kCifarPixels);
  for (std::size_t r = 0; r < records; ++r) {
    if (!is.read(reinterpret_cast<char*>(buf.data()), kCifarRecord))
      throw DataError("read failed in " + path + " at record " +
                      std::to_string(r));
    if (buf[0] >= kCifarClasses)
      throw DataError("label " + std::to_string(int(buf[0])) + " out of range at byte offset " +
                      std::to_string(r * kCifarRecord) + " in " + path);
    out.labels.push_back(buf[0]);
    out.pixels.insert(out.pixels.end(), buf.begin() + 1, buf.end());
  }
}

Cifar10 load_cifar10(const std::string& dir) {
  Cifar10 ds;
  const fs::path root(dir);
  const auto simple_train = root / "train.bin";
  const auto simple_val = root / "val.bin";
  if (fs::exists(simple_train)) {
    ingest_cifar10_file(simple_train.string(), ds.train);
    if (fs::exists(simple_val)) ingest_cifar10_file(simple_val.string(), ds.val);
    return ds;
  }
  bool any = false;
  for (int i = 1; i <= 5; ++i) {
    const auto p = root / ("data_batch_" + std::to_string(i) + ".bin");
    if (fs::exists(p)) {
      ingest_cifar10_file(p.string(), ds.train);
      any = true;
    }
  }
  const auto test = root / "test_batch.bin";
  if (fs::exists(test)) {
    ingest_cifar10_file(test.string(), ds.val);
    any = true;
  }
  if (!any || ds.train.count() == 0) {
    throw DataError(
        "no dataset found under '" + dir +
        "'. Expected either train.bin (+ optional val.bin) or the standard "
        "CIFAR-10 binary layout data_batch_1.bin..data_batch_5.bin + "
        "test_batch.bin, each a sequence of 3073-byte records "
        "(1 label byte + 3072 image bytes).");
  }
  return ds;
}

NormStats compute_norm_stats(const LabeledImages& data) {
  NormStats s;
  if (data.count() == 0) return s;
  const std::size_t plane = kCifarSide * kCifarSide;
  for (std::size_t ch = 0; ch < 3; ++ch) {
    double sum = 0, sumsq = 0;
    for (std::size_t i = 0; i < data.count(); ++i) {
      const std::uint8_t* img = data.pixels.data() + i * kCifarPixels + ch * plane;
      for (std::size_t p = 0; p < plane; ++p) {
        const double v = double(img[p]) / 255.0;
        sum += v;
        sumsq += v * v;
      }
    }
    const double n = double(data.count() * plane);
    const double mean = sum / n;
    double var = sumsq / n - mean * mean;
    if (var < 1e-12) var = 1e-12;  // constant-channel degenerate case
    s.mean[ch] = mean;
    s.stddev[ch] = std::sqrt(var);
  }
  return s;
}

}  // namespace vgru
