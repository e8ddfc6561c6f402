// Copyright 2026 The VisionGRU Authors. Apache 2.0 License.
//
// Acceptance suite. Each criterion prints one [PASS]/[FAIL] line; the exit
// status is the number of failed criteria. Run a single criterion with
// --criterion N.
//
//   1  scan oracle equivalence (f64 and f32 tolerances)
//   2  closed-form block equivalence, pre-FFN, 64-bit
//   3  finite-difference gradients for every parameter class
//   4  parameter budgets after width calibration
//   5  complexity trend: analytic ratios + measured resolution sweep
//   6  scan scaling: flat time/T, parallel vs sequential at T=65536
//   7  training sanity: overfit a 500-sample subset, deterministic logs
//   8  persistence: bitwise checkpoint round trip and exact resume

#include <chrono>
#include <cstring>
#include <iostream>
#include <thread>

#include "support.hpp"
#include "vgru/bench.hpp"
#include "vgru/train.hpp"
#include "vgru/verify.hpp"

using namespace vgru;
using namespace vgru_test;

namespace {

struct Gate {
  bool all = true;
  void check(bool ok, const std::string& label, const std::string& detail = "") {
    std::cout << "    " << (ok ? "ok  " : "FAIL") << "  " << label;
    if (!detail.empty()) std::cout << "  (" << detail << ")";
    std::cout << "\n";
    all = all && ok;
  }
  void info(const std::string& label) { std::cout << "    note  " << label << "\n"; }
};

std::string fmt(double v) {
  char b[64];
  std::snprintf(b, sizeof b, "%.4g", v);
  return b;
}

std::vector<char> slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("missing file " + path);
  return std::vector<char>(std::istreambuf_iterator<char>(is),
                           std::istreambuf_iterator<char>());
}

// ---------------------------------------------------------------------------

bool criterion1(std::uint64_t seed) {
  Gate g;
  SuiteResult d = suite_scan_equivalence<double>(seed, "");
  g.check(d.pass && d.cases >= 200, "f64: " + std::to_string(d.cases) + " cases",
          "max_rel " + fmt(d.max_err) + " tol 1e-10");
  SuiteResult f = suite_scan_equivalence<float>(seed, "");
  g.check(f.pass && f.cases >= 200, "f32: " + std::to_string(f.cases) + " cases",
          "max_rel " + fmt(f.max_err) + " tol 1e-5");
  return g.all;
}

bool criterion2(std::uint64_t seed) {
  Gate g;
  SuiteResult r = suite_closed_form<double>(seed, "", 50);
  g.check(r.pass && r.cases >= 50,
          std::to_string(r.cases) + " random instances up to 4x5",
          "max_rel " + fmt(r.max_err) + " tol 1e-10");
  return g.all;
}

bool criterion3(std::uint64_t seed) {
  Gate g;
  SuiteResult bb = suite_backbone_gradients(seed);
  g.check(bb.pass, "2-block mini model, every parameter class",
          "max_rel " + fmt(bb.max_err) + " tol 1e-4" +
              (bb.note.empty() ? "" : ", " + bb.note));
  SuiteResult blk = suite_block_gradients(seed);
  g.check(blk.pass, "block-level gradients", "max_rel " + fmt(blk.max_err));
  SuiteResult mg = suite_mingru_gradients(seed, 50);
  g.check(mg.pass, "mingru gradients, 50 instances",
          "max_rel " + fmt(mg.max_err));
  return g.all;
}

bool criterion4(std::uint64_t) {
  Gate g;
  ModelSpec tiny = ModelSpec::preset("tiny");
  auto cal_t = calibrate_width(tiny, 30'000'000);
  g.info("calibration: tiny chose D=" + std::to_string(cal_t.width) + " -> " +
         std::to_string(cal_t.params) + " params (target 30M)");
  g.check(cal_t.params >= 25'500'000 && cal_t.params <= 34'500'000,
          "tiny in [25.5M, 34.5M]");
  g.check(cal_t.width == tiny.base_width,
          "preset width equals the calibrated width",
          "D=" + std::to_string(tiny.base_width));

  ModelSpec base = ModelSpec::preset("base");
  auto cal_b = calibrate_width(base, 86'000'000);
  g.info("calibration: base chose D=" + std::to_string(cal_b.width) + " -> " +
         std::to_string(cal_b.params) + " params (target 86M)");
  g.check(cal_b.params >= 73'100'000 && cal_b.params <= 98'900'000,
          "base in [73.1M, 98.9M]");
  g.check(cal_b.width == base.base_width,
          "preset width equals the calibrated width",
          "D=" + std::to_string(base.base_width));
  return g.all;
}

bool criterion5(std::uint64_t) {
  Gate g;
  const ModelSpec tiny = ModelSpec::preset("tiny");
  const double f224 = count_flops(tiny, 224).total_with_head;
  const double f448 = count_flops(tiny, 448).total_with_head;
  const double f1248 = count_flops(tiny, 1248).total_with_head;
  const double ratio = f448 / f224;
  g.check(ratio >= 3.6 && ratio <= 4.4, "backbone FLOPs ratio 448^2/224^2",
          fmt(ratio));

  // Quadratic comparator at the backbone's own stage-1 token granularity
  // (patch 4). At patch 16 the projection/MLP terms still dominate between
  // 224^2 and 448^2 and the ratio is ~4.9; both are printed.
  auto base4 = [&](std::size_t r) {
    return baseline_attention_flops(384, 12, 4, r);
  };
  auto base16 = [&](std::size_t r) {
    return baseline_attention_flops(384, 12, 16, r);
  };
  const double bratio4 = base4(448) / base4(224);
  const double bratio16 = base16(448) / base16(224);
  g.info("attention baseline ratio 448^2/224^2: patch-4 " + fmt(bratio4) +
         ", DeiT-S patch-16 " + fmt(bratio16));
  g.check(bratio4 >= 8.0, "baseline ratio >= 8 (same-granularity comparator)",
          fmt(bratio4));

  g.check(base16(1248) > f1248 && base4(1248) > f1248,
          "baseline(1248^2) exceeds backbone(1248^2)",
          "DeiT-S " + fmt(base16(1248) / 1e9) + "G vs " + fmt(f1248 / 1e9) + "G");
  const double anchor = f1248 / 151.9e9;
  g.check(anchor <= 2.0 && anchor >= 0.5,
          "tiny(1248^2) within factor 2 of 151.9 GFLOPs",
          fmt(f1248 / 1e9) + "G, factor " + fmt(anchor));

  // measured sweep at reduced resolutions
  SweepConfig sw;
  sw.resolutions = {224, 448};
  sw.reps = 6;
  sw.warmup = 2;
  const auto t0 = std::chrono::steady_clock::now();
  BenchReport rep = run_resolution_sweep<float>(tiny, sw);
  const double sweep_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  double ms224 = 0, ms448 = 0;
  for (const auto& row : rep.rows) {
    if (row.model.rfind("visiongru", 0) == 0 && row.measured) {
      if (row.resolution == 224) ms224 = row.ms_mean;
      if (row.resolution == 448) ms448 = row.ms_mean;
    }
  }
  g.info("measured forward: 224^2 " + fmt(ms224) + " ms, 448^2 " + fmt(ms448) +
         " ms, sweep took " + fmt(sweep_s) + " s");
  const double mratio = ms448 / ms224;
  g.check(ms224 > 0 && ms448 > 0 && mratio >= 3.0 && mratio <= 5.5,
          "measured time ratio in [3.0, 5.5]", fmt(mratio));
  g.check(sweep_s < 600.0, "sweep completed inside 10 minutes");
  return g.all;
}

bool criterion6(std::uint64_t) {
  Gate g;
  ScanBenchConfig cfg;
  cfg.lengths = {256, 1024, 4096, 16384, 65536};
  cfg.lanes = 64;
  cfg.reps = 9;
  cfg.warmup = 3;
  BenchReport rep = run_scan_microbench<float>(cfg);
  g.check(rep.correctness_ok, "kernels agree on benchmarked inputs");

  double per_min = 1e300, per_max = 0, seq65536 = 0, par65536 = 0;
  for (const auto& row : rep.rows) {
    if (row.model == "scan-parallel") {
      const double per = row.ms_mean / double(row.resolution);
      per_min = std::min(per_min, per);
      per_max = std::max(per_max, per);
      if (row.resolution == 65536) par65536 = row.ms_mean;
    } else if (row.model == "scan-sequential" && row.resolution == 65536) {
      seq65536 = row.ms_mean;
    }
    std::cout << "      " << row.model << " T=" << row.resolution << " "
              << fmt(row.ms_mean) << " ms (sd " << fmt(row.ms_std) << ")\n";
  }
  g.check(per_max / per_min <= 2.5,
          "parallel time/T varies <= 2.5x across the sweep",
          "spread " + fmt(per_max / per_min));

  const unsigned cores = std::thread::hardware_concurrency();
  if (cores >= 4) {
    g.check(par65536 <= seq65536,
            "parallel beats sequential at T=65536, 64 lanes",
            fmt(par65536) + " ms vs " + fmt(seq65536) + " ms");
  } else {
    g.info("SKIP parallel-vs-sequential gate: host has " +
           std::to_string(cores) +
           " cores, the criterion conditions on >= 4 (measured parallel " +
           fmt(par65536) + " ms vs sequential " + fmt(seq65536) + " ms)");
  }
  return g.all;
}

TrainConfig overfit_config(const std::string& data_dir, const std::string& out) {
  TrainConfig cfg;
  cfg.lr = 1.5e-3;
  cfg.lr_min = 1e-5;
  cfg.batch = 50;
  cfg.epochs = 50;
  cfg.warmup_epochs = 3;
  cfg.weight_decay = 0.05;
  cfg.label_smoothing = 0.1;
  cfg.seed = 123;
  cfg.subset = 500;
  cfg.image_size = 64;
  cfg.stop_at_train_top1 = 0.998;
  cfg.data_dir = data_dir;
  cfg.out_dir = out;
  return cfg;
}

ModelSpec tiny_mini_spec() {
  ModelSpec spec = ModelSpec::preset("tiny");  // depths {2,2,8,2}
  spec.variant = "tiny-mini";
  spec.base_width = 32;
  spec.num_classes = 10;
  spec.res_h = spec.res_w = 64;
  return spec;
}

std::string rows_fingerprint(const std::vector<MetricRow>& rows) {
  // the CSV bytes minus the wall-clock seconds column
  std::string s;
  for (const auto& r : rows) {
    const std::string line = metric_csv_line(r);
    s += line.substr(0, line.rfind(','));
    s += '\n';
  }
  return s;
}

bool criterion7(std::uint64_t) {
  Gate g;
  const std::string dir = temp_dir("accept_c7");
  write_synthetic_cifar(dir + "/train.bin", 500, 1001);

  const ModelSpec spec = tiny_mini_spec();
  const auto t0 = std::chrono::steady_clock::now();
  TrainResult a = train_loop<float>(spec, overfit_config(dir, dir + "/run_a"));
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const std::size_t epochs_used = a.rows.empty() ? 0 : a.rows.back().epoch + 1;
  g.info("run A: " + std::to_string(epochs_used) + " epochs, final train top1 " +
         fmt(a.final_train_top1) + ", " + fmt(secs) + " s");
  g.check(a.final_train_top1 >= 0.99 && epochs_used <= 50,
          "500-sample overfit reaches >= 99% train top1 within 50 epochs");

  TrainResult b = train_loop<float>(spec, overfit_config(dir, dir + "/run_b"));
  g.check(rows_fingerprint(a.rows) == rows_fingerprint(b.rows),
          "same-seed rerun: metric logs byte-identical (seconds column "
          "excluded: wall clock)");
  return g.all;
}

bool criterion8(std::uint64_t) {
  Gate g;
  const std::string dir = temp_dir("accept_c8");
  write_synthetic_cifar(dir + "/train.bin", 64, 2002);
  write_synthetic_cifar(dir + "/val.bin", 40, 2003);

  ModelSpec spec;
  spec.variant = "mini";
  spec.base_width = 16;
  spec.depths = {1, 1, 1, 1};
  spec.res_h = spec.res_w = 32;
  spec.num_classes = 10;

  TrainConfig cfg;
  cfg.lr = 1e-3;
  cfg.batch = 16;
  cfg.epochs = 4;
  cfg.warmup_epochs = 1;
  cfg.seed = 77;
  cfg.image_size = 32;
  cfg.data_dir = dir;

  TrainConfig full = cfg;
  full.out_dir = dir + "/full";
  TrainResult unbroken = train_loop<float>(spec, full);

  // bitwise round trip: load the checkpoint and write it back out
  {
    Backbone<float> model(spec);
    AdamW<float> opt({}, {});
    opt.attach(model.params());
    Ema<float> ema(cfg.ema_decay);
    ema.attach(model.params());
    auto rs = load_training_checkpoint<float>(unbroken.last_checkpoint, model,
                                              &opt, &ema);
    const std::string again = dir + "/resaved.vgru";
    save_training_checkpoint(again, model, opt, ema, rs.epoch,
                             config_hash(spec, cfg), cfg.seed, rs.best_val,
                             rs.best_epoch);
    g.check(slurp(unbroken.last_checkpoint) == slurp(again),
            "checkpoint load+save round trip is byte identical");
  }

  TrainConfig head_cfg = cfg;
  head_cfg.out_dir = dir + "/head";
  head_cfg.run_epochs_cap = 2;
  TrainResult head = train_loop<float>(spec, head_cfg);

  TrainConfig tail_cfg = cfg;
  tail_cfg.out_dir = dir + "/tail";
  TrainResult tail = train_loop<float>(spec, tail_cfg, head.last_checkpoint);

  std::vector<MetricRow> glued = head.rows;
  glued.insert(glued.end(), tail.rows.begin(), tail.rows.end());
  g.check(rows_fingerprint(glued) == rows_fingerprint(unbroken.rows),
          "resumed run reproduces the unbroken metric log (seconds column "
          "excluded: wall clock)");
  g.check(slurp(tail.last_checkpoint) == slurp(unbroken.last_checkpoint),
          "resumed final checkpoint is byte-identical to the unbroken one");
  return g.all;
}

struct Entry {
  int id;
  const char* title;
  bool (*fn)(std::uint64_t);
};

const Entry kCriteria[] = {
    {1, "scan oracle equivalence", criterion1},
    {2, "closed-form block equivalence", criterion2},
    {3, "gradient correctness (finite differences)", criterion3},
    {4, "parameter budgets after calibration", criterion4},
    {5, "complexity trend vs quadratic baseline", criterion5},
    {6, "scan scaling", criterion6},
    {7, "training sanity (overfit + determinism)", criterion7},
    {8, "persistence (round trip + resume)", criterion8},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  std::uint64_t seed = 1;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--criterion" && i + 1 < argc) only = std::atoi(argv[++i]);
    else if (a == "--seed" && i + 1 < argc) seed = std::strtoull(argv[++i], nullptr, 10);
    else if (a == "--list") {
      for (const auto& e : kCriteria)
        std::cout << e.id << ": " << e.title << "\n";
      return 0;
    } else {
      std::cerr << "usage: vgru_acceptance [--criterion N] [--seed S] [--list]\n";
      return 2;
    }
  }

  int failures = 0;
  for (const auto& e : kCriteria) {
    if (only != 0 && e.id != only) continue;
    std::cout << "criterion " << e.id << ": " << e.title << "\n";
    bool ok = false;
    try {
      ok = e.fn(seed);
    } catch (const std::exception& ex) {
      std::cout << "    exception: " << ex.what() << "\n";
    }
    std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << e.id << ": "
              << e.title << "\n";
    if (!ok) ++failures;
  }
  return failures;
}
