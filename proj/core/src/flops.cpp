// Copyright 2026 The VisionGRU Authors. Apache 2.0 License.

#include "vgru/flops.hpp"

namespace vgru {

FlopReport count_flops(const ModelSpec& spec, std::size_t res_h,
                       std::size_t res_w) {
  if (res_h % 32 != 0 || res_w % 32 != 0)
    throw std::invalid_argument("flops: resolution must be divisible by 32");
  FlopReport r;
  const double d = double(spec.base_width);
  const double mid = d / 2;

  auto push = [&](const std::string& label, double f) {
    r.items.push_back({label, f});
    r.total_without_head += f;
  };

  // stem: two stride-2 3x3 convolutions with a GELU between
  const double g2 = double(res_h / 2) * double(res_w / 2);
  const double g4 = double(res_h / 4) * double(res_w / 4);
  push("stem.conv1", g2 * 9.0 * 3.0 * mid * kFlopsPerMac + 2.0 * g2 * mid);
  push("stem.conv2", g4 * 9.0 * mid * d * kFlopsPerMac + g4 * d);
  push("stem.pos_add", g4 * d);
  r.tokens = g4;

  const auto widths = spec.stage_widths();
  double n = g4;
  for (std::size_t s = 0; s < 4; ++s) {
    const double c = double(widths[s]);
    const double f = double(spec.block_spec(s).ffn_hidden());
    const double k2 = double(spec.dw_kernel) * double(spec.dw_kernel);
    double per_block = 0;
    per_block += kLayerNormFlopsPerElt * n * c;               // norm1
    per_block += n * c * k2 * kFlopsPerMac + n * c;           // depthwise
    // two scan directions: gate + candidate linears, gate sigmoid,
    // pair build, scan, and the per-position aggregation
    per_block += 2.0 * (2.0 * n * c * c * kFlopsPerMac + 2.0 * n * c);
    per_block += 2.0 * (n * c + 2.0 * n * c + kScanFlopsPerElt * n * c);
    per_block += 2.0 * n * c;  // residual sum of both paths
    if (spec.ffn_enabled) {
      per_block += kLayerNormFlopsPerElt * n * c;  // norm2
      per_block += n * c * f * kFlopsPerMac + n * f;
      per_block += n * f;  // activation
      per_block += n * f * c * kFlopsPerMac + n * c;
      per_block += n * c;  // residual
    }
    push("stage" + std::to_string(s + 1) + ".blocks",
         per_block * double(spec.depths[s]));
    if (s < 3) {
      const double cin = 4.0 * c, cout = double(widths[s + 1]);
      const double n_out = n / 4.0;
      push("downsample" + std::to_string(s + 1),
           kLayerNormFlopsPerElt * n_out * cin +
               n_out * cin * cout * kFlopsPerMac + n_out * cout);
      n = n_out;
    }
  }

  const double c4 = double(widths[3]);
  const double head = n * c4 /* pool adds */ +
                      c4 * double(spec.num_classes) * kFlopsPerMac +
                      double(spec.num_classes);
  r.items.push_back({"head", head});
  r.total_with_head = r.total_without_head + head;
  return r;
}

double baseline_attention_flops(std::size_t embed_dim, std::size_t depth,
                                std::size_t patch, std::size_t resolution) {
  const double d = double(embed_dim);
  const double tokens_per_side = double(resolution) / double(patch);
  const double n = tokens_per_side * tokens_per_side;
  const double per_layer = 4.0 * n * d * d + 2.0 * n * n * d + 8.0 * n * d * d;
  return per_layer * double(depth);
}

}  // namespace vgru
