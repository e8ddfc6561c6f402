// Copyright 2026 The VisionGRU Authors. Apache 2.0 License.
//
// CIFAR-10 binary ingestion. Records are 1 label byte + 3072 image bytes
// (3 channel planes of 32x32, row-major). Images are normalized per
// channel with constants computed from the training split, then resampled
// to the training resolution on batch assembly.

#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "vgru/nn.hpp"

namespace vgru {

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr std::size_t kCifarSide = 32;
constexpr std::size_t kCifarPixels = 3 * kCifarSide * kCifarSide;  // 3072
constexpr std::size_t kCifarRecord = 1 + kCifarPixels;             // 3073
constexpr int kCifarClasses = 10;

struct LabeledImages {
  std::vector<std::uint8_t> labels;
  std::vector<std::uint8_t> pixels;  // count * 3072, channel-planar

  std::size_t count() const { return labels.size(); }

  void truncate(std::size_t n) {
    if (n == 0 || n >= count()) return;
    labels.resize(n);
    pixels.resize(n * kCifarPixels);
  }
};

struct NormStats {
  std::array<double, 3> mean{0, 0, 0};
  std::array<double, 3> stddev{1, 1, 1};
};

// Appends the records of one file. Truncated records and labels >= 10 are
// rejected with the byte offset of the offending record.
void ingest_cifar10_file(const std::string& path, LabeledImages& out);

struct Cifar10 {
  LabeledImages train;
  LabeledImages val;
};

// Accepts either {train.bin, val.bin} or the standard
// {data_batch_1..5.bin, test_batch.bin} layout inside `dir`.
Cifar10 load_cifar10(const std::string& dir);

// Per-channel mean/std over the given split, pixel values scaled to [0,1].
NormStats compute_norm_stats(const LabeledImages& data);

// Assembles a normalized batch at the requested square resolution.
template <typename T>
Tensor<T> make_batch(const LabeledImages& data,
                     const std::vector<std::size_t>& indices,
                     const NormStats& stats, std::size_t resolution,
                     std::vector<int>* labels_out) {
  const std::size_t b = indices.size();
  Tensor<T> raw({b, kCifarSide, kCifarSide, 3});
  T* p = raw.data();
  if (labels_out) labels_out->resize(b);
  for (std::size_t i = 0; i < b; ++i) {
    const std::size_t idx = indices[i];
    if (idx >= data.count())
      throw DataError("batch index " + std::to_string(idx) +
                      " out of range (dataset has " +
                      std::to_string(data.count()) + " records)");
    if (labels_out) (*labels_out)[i] = data.labels[idx];
    const std::uint8_t* img = data.pixels.data() + idx * kCifarPixels;
    for (std::size_t r = 0; r < kCifarSide; ++r)
      for (std::size_t c = 0; c < kCifarSide; ++c)
        for (std::size_t ch = 0; ch < 3; ++ch) {
          const double v =
              double(img[ch * kCifarSide * kCifarSide + r * kCifarSide + c]) / 255.0;
          p[((i * kCifarSide + r) * kCifarSide + c) * 3 + ch] =
              T((v - stats.mean[ch]) / stats.stddev[ch]);
        }
  }
  if (resolution == kCifarSide) return raw;
  return bilinear_resize(raw, resolution, resolution);
}

}  // namespace vgru
