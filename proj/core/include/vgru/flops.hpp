// Copyright 2026 The VisionGRU Authors. Apache 2.0 License.
//
// Analytic operation counts for one forward pass.
//
// Conventions (printed in every report header):
//   * one multiply-accumulate = 1 FLOP, the convention used by the common
//     vision-model FLOPs figures these numbers are compared against
//     (a DeiT-S-like transformer at 224x224 comes out at ~4.6 GFLOPs);
//   * elementwise ops (adds, gates, activations) = 1 FLOP per element;
//   * layer norm = 8 FLOPs per element, scan = 9 FLOPs per element
//     (three pair compositions of three ops each).

#pragma once

#include <string>
#include <vector>

#include "vgru/backbone.hpp"

namespace vgru {

constexpr double kFlopsPerMac = 1.0;
constexpr double kLayerNormFlopsPerElt = 8.0;
constexpr double kScanFlopsPerElt = 9.0;

struct FlopItem {
  std::string label;
  double flops;
};

struct FlopReport {
  std::vector<FlopItem> items;
  double total_with_head = 0;
  double total_without_head = 0;
  double tokens = 0;  // stage-1 sequence length (H/4 * W/4)
};

FlopReport count_flops(const ModelSpec& spec, std::size_t res_h,
                       std::size_t res_w);

inline FlopReport count_flops(const ModelSpec& spec, std::size_t res) {
  return count_flops(spec, res, res);
}

// Standard ViT cost: per layer 4nd^2 (projections) + 2n^2d (attention) +
// 8nd^2 (MLP), n = (res/patch)^2, summed over depth. The quadratic
// comparator for the complexity sweeps.
double baseline_attention_flops(std::size_t embed_dim, std::size_t depth,
                                std::size_t patch, std::size_t resolution);

}  // namespace vgru
