// Copyright 2026 The VisionGRU Authors. Apache 2.0 License.
//
// Desk-scale complexity benchmarks: a resolution sweep of the backbone
// against the quadratic attention baseline (analytic FLOPs + measured
// forward wall time), and a scan kernel microbenchmark. Measured columns
// use median-of-means over the repetitions after discarded warmup runs;
// analytic columns are deterministic.

#pragma once

#include <algorithm>
#include <chrono>

#include "vgru/flops.hpp"
#include "vgru/verify.hpp"

namespace vgru {

struct BenchRow {
  std::string model;
  std::size_t resolution = 0;  // pixels per side; scan rows use T here
  double tokens = 0;
  double gflops = 0;
  double ms_mean = 0;  // NaN when the row was not measured
  double ms_std = 0;
  long long workspace_bytes = 0;
  bool measured = false;
  std::string note;
};

struct BenchReport {
  std::vector<std::string> meta;  // rendered as "# key: value"
  std::vector<BenchRow> rows;
  bool correctness_ok = true;
};

void write_bench_csv(const BenchReport& report, const std::string& path);
void write_bench_dat(const BenchReport& report, const std::string& path);
std::string format_bench_table(const BenchReport& report);
void append_common_meta(BenchReport& report, const char* precision);

struct SweepConfig {
  std::vector<std::size_t> resolutions{224, 448};
  int reps = 10;
  int warmup = 3;
  std::size_t mem_limit_mb = 6144;
  std::size_t baseline_dim = 384;  // DeiT-S-like comparator
  std::size_t baseline_depth = 12;
  std::size_t baseline_patch = 16;
};

struct ScanBenchConfig {
  std::vector<std::size_t> lengths{256, 1024, 4096, 16384, 65536};
  std::size_t lanes = 64;
  int reps = 10;
  int warmup = 3;
};

namespace detail {

template <typename F>
double time_ms(F&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

// central value: median of the means of consecutive triples
inline std::pair<double, double> median_of_means(std::vector<double> samples) {
  if (samples.empty()) return {0, 0};
  double mean = 0;
  for (double s : samples) mean += s;
  mean /= double(samples.size());
  double var = 0;
  for (double s : samples) var += (s - mean) * (s - mean);
  const double sd = samples.size() > 1
                        ? std::sqrt(var / double(samples.size() - 1))
                        : 0.0;
  std::vector<double> groups;
  for (std::size_t i = 0; i + 3 <= samples.size(); i += 3)
    groups.push_back((samples[i] + samples[i + 1] + samples[i + 2]) / 3.0);
  if (groups.empty()) groups.push_back(mean);
  std::sort(groups.begin(), groups.end());
  return {groups[groups.size() / 2], sd};
}

}  // namespace detail

template <typename T>
BenchReport run_resolution_sweep(const ModelSpec& spec, const SweepConfig& cfg) {
  BenchReport report;
  append_common_meta(report, sizeof(T) == 8 ? "f64" : "f32");
  report.meta.push_back("mode: resolution-sweep, batch 1, forward only");
  report.meta.push_back("reps: " + std::to_string(cfg.reps) + " after " +
                        std::to_string(cfg.warmup) + " warmup");
  report.meta.push_back(
      "baseline: attention d=" + std::to_string(cfg.baseline_dim) + " depth=" +
      std::to_string(cfg.baseline_depth) + " patch=" +
      std::to_string(cfg.baseline_patch) + " (analytic only)");

  for (std::size_t res : cfg.resolutions) {
    if (res % 32 != 0)
      throw std::invalid_argument("sweep resolution must be divisible by 32");

    const FlopReport fr = count_flops(spec, res);
    BenchRow row;
    row.model = "visiongru-" + spec.variant;
    row.resolution = res;
    row.tokens = fr.tokens;
    row.gflops = fr.total_with_head / 1e9;

    // rough activation footprint; rows that do not fit are marked, not run
    const double est_bytes =
        double(res / 4) * double(res / 4) * double(spec.base_width) *
            double(sizeof(T)) * 16.0 +
        double(count_params(spec)) * sizeof(T) * 1.2;
    if (est_bytes > double(cfg.mem_limit_mb) * 1024.0 * 1024.0) {
      row.measured = false;
      row.ms_mean = row.ms_std = std::nan("");
      row.note = "skipped: estimated " +
                 std::to_string(long(est_bytes / 1048576.0)) +
                 " MiB exceeds mem_limit_mb";
      report.rows.push_back(row);
    } else {
      Backbone<T> model(spec);
      model.init(7);
      Rng rng = stream(7, "bench.input", res);
      Tensor<T> img({1, res, res, 3});
      for (std::size_t i = 0; i < img.numel(); ++i)
        img[i] = T(rng.uniform(-1.0, 1.0));

      for (int i = 0; i < cfg.warmup; ++i) (void)model.forward(img);
      const long long before = AllocStats::current.load();
      AllocStats::reset_peak();
      std::vector<double> times;
      for (int i = 0; i < cfg.reps; ++i)
        times.push_back(detail::time_ms([&] { (void)model.forward(img); }));
      auto [center, sd] = detail::median_of_means(std::move(times));
      row.ms_mean = center;
      row.ms_std = sd;
      row.workspace_bytes = AllocStats::peak.load() - before;
      row.measured = true;
      report.rows.push_back(row);
    }

    BenchRow base;
    base.model = "attn-baseline";
    base.resolution = res;
    const double n = double(res / cfg.baseline_patch);
    base.tokens = n * n;
    base.gflops =
        baseline_attention_flops(cfg.baseline_dim, cfg.baseline_depth,
                                 cfg.baseline_patch, res) /
        1e9;
    base.ms_mean = base.ms_std = std::nan("");
    base.measured = false;
    base.note = "analytic";
    report.rows.push_back(base);
  }
  return report;
}

template <typename T>
BenchReport run_scan_microbench(const ScanBenchConfig& cfg) {
  BenchReport report;
  append_common_meta(report, sizeof(T) == 8 ? "f64" : "f32");
  report.meta.push_back("mode: scan-microbench, lanes " +
                        std::to_string(cfg.lanes));
  report.meta.push_back("reps: " + std::to_string(cfg.reps) + " after " +
                        std::to_string(cfg.warmup) + " warmup");
  const double tol = sizeof(T) == 8 ? 1e-10 : 1e-5;

  for (std::size_t len : cfg.lengths) {
    Rng rng = stream(11, "bench.scan", len);
    ScanPair<T> pairs = random_scan_pair<T>(len, cfg.lanes, rng);

    Tensor<T> ref, par;
    for (int i = 0; i < cfg.warmup; ++i) {
      ref = scan_sequential(pairs);
      par = scan_parallel(pairs);
    }
    const double err = max_rel_diff(ref, par);
    const bool ok = err <= tol;
    report.correctness_ok = report.correctness_ok && ok;

    std::vector<double> ts, tp;
    const long long before = AllocStats::current.load();
    AllocStats::reset_peak();
    for (int i = 0; i < cfg.reps; ++i)
      ts.push_back(detail::time_ms([&] { ref = scan_sequential(pairs); }));
    const long long ws_seq = AllocStats::peak.load() - before;
    AllocStats::reset_peak();
    for (int i = 0; i < cfg.reps; ++i)
      tp.push_back(detail::time_ms([&] { par = scan_parallel(pairs); }));
    const long long ws_par = AllocStats::peak.load() - before;

    auto [ms_s, sd_s] = detail::median_of_means(std::move(ts));
    auto [ms_p, sd_p] = detail::median_of_means(std::move(tp));
    const double elems = double(len) * double(cfg.lanes);
    report.rows.push_back({"scan-sequential", len, elems, 2.0 * elems / 1e9,
                           ms_s, sd_s, ws_seq, true,
                           ok ? "outputs-match" : "OUTPUT-MISMATCH"});
    report.rows.push_back({"scan-parallel", len, elems,
                           kScanFlopsPerElt * elems / 1e9, ms_p, sd_p, ws_par,
                           true, ok ? "outputs-match" : "OUTPUT-MISMATCH"});
  }
  return report;
}

}  // namespace vgru
