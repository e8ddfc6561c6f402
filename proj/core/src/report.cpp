// Copyright 2026 The VisionGRU Authors. Apache 2.0 License.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <thread>

#include "vgru/bench.hpp"

namespace vgru {

void append_common_meta(BenchReport& report, const char* precision) {
  report.meta.push_back("cores: " +
                        std::to_string(std::thread::hardware_concurrency()));
  report.meta.push_back("workers: " + std::to_string(max_threads()));
  report.meta.push_back(std::string("precision: ") + precision);
  report.meta.push_back(
      "flops convention: 1 multiply-accumulate = 1 FLOP, elementwise ops 1 "
      "FLOP each, layer norm 8/elt, scan 9/elt");
}

namespace {

std::string row_fields(const BenchRow& r, char sep) {
  char buf[256];
  if (r.measured) {
    std::snprintf(buf, sizeof buf, "%s%c%zu%c%.0f%c%.6g%c%.4f%c%.4f%c%lld",
                  r.model.c_str(), sep, r.resolution, sep, r.tokens, sep,
                  r.gflops, sep, r.ms_mean, sep, r.ms_std, sep,
                  r.workspace_bytes);
  } else {
    std::snprintf(buf, sizeof buf, "%s%c%zu%c%.0f%c%.6g%cnan%cnan%c0",
                  r.model.c_str(), sep, r.resolution, sep, r.tokens, sep,
                  r.gflops, sep, sep, sep);
  }
  return buf;
}

}  // namespace

void write_bench_csv(const BenchReport& report, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write bench report: " + path);
  for (const auto& m : report.meta) os << "# " << m << "\n";
  os << "model,resolution,tokens,gflops,ms_mean,ms_std,workspace_bytes\n";
  for (const auto& r : report.rows) {
    os << row_fields(r, ',');
    if (!r.note.empty()) os << "  # " << r.note;
    os << "\n";
  }
}

void write_bench_dat(const BenchReport& report, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write bench data file: " + path);
  for (const auto& m : report.meta) os << "# " << m << "\n";
  os << "# model resolution tokens gflops ms_mean ms_std workspace_bytes\n";
  // one gnuplot data block per model series, selectable with `index`
  std::vector<std::string> series;
  for (const auto& r : report.rows)
    if (std::find(series.begin(), series.end(), r.model) == series.end())
      series.push_back(r.model);
  for (std::size_t s = 0; s < series.size(); ++s) {
    if (s) os << "\n\n";
    os << "# series: " << series[s] << "\n";
    for (const auto& r : report.rows)
      if (r.model == series[s]) os << row_fields(r, ' ') << "\n";
  }
}

std::string format_bench_table(const BenchReport& report) {
  std::ostringstream os;
  for (const auto& m : report.meta) os << "# " << m << "\n";
  char line[256];
  std::snprintf(line, sizeof line, "%-22s %10s %12s %12s %10s %10s %12s\n",
                "model", "res", "tokens", "gflops", "ms_mean", "ms_std",
                "workspace");
  os << line;
  for (const auto& r : report.rows) {
    if (r.measured) {
      std::snprintf(line, sizeof line,
                    "%-22s %10zu %12.0f %12.4g %10.3f %10.3f %12lld\n",
                    r.model.c_str(), r.resolution, r.tokens, r.gflops,
                    r.ms_mean, r.ms_std, r.workspace_bytes);
    } else {
      std::snprintf(line, sizeof line,
                    "%-22s %10zu %12.0f %12.4g %10s %10s %12s  %s\n",
                    r.model.c_str(), r.resolution, r.tokens, r.gflops, "-", "-",
                    "-", r.note.c_str());
    }
    os << line;
  }
  return os.str();
}

}  // namespace vgru
