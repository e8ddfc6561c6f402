// Copyright 2026 The VisionGRU Authors. Apache 2.0 License.
//
// Single command-line entry point.
//
//   vgru verify   -- oracle suites (scan, closed form, gradients)
//   vgru train    -- desk-scale training from a config file
//   vgru eval     -- score a checkpoint on the validation split
//   vgru params   -- itemized parameter counts, width calibration
//   vgru flops    -- itemized analytic FLOPs
//   vgru bench    -- resolution sweep + scan microbenchmark
//
// Exit codes: 0 success, 2 config/usage error, 3 data error,
// 4 verification/benchmark check failure, 1 anything else.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "vgru/bench.hpp"
#include "vgru/config.hpp"
#include "vgru/train.hpp"
#include "vgru/verify.hpp"

namespace {

using namespace vgru;

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitVerify = 4;

ModelSpec model_spec_from_config(const Config& cfg) {
  const std::string variant = cfg.get_str("model.variant", "tiny");
  ModelSpec spec = variant == "custom" ? ModelSpec{} : ModelSpec::preset(variant);
  if (variant == "custom") spec.variant = "custom";
  spec.base_width = std::size_t(cfg.get_int("model.d", std::int64_t(spec.base_width)));
  auto depths = cfg.get_int_list("model.depths",
                                 {std::int64_t(spec.depths[0]), std::int64_t(spec.depths[1]),
                                  std::int64_t(spec.depths[2]), std::int64_t(spec.depths[3])});
  if (depths.size() != 4)
    throw ConfigError("model.depths expects exactly 4 comma-separated counts");
  for (std::size_t i = 0; i < 4; ++i) spec.depths[i] = std::size_t(depths[i]);
  spec.num_classes =
      std::size_t(cfg.get_int("model.num_classes", std::int64_t(spec.num_classes)));
  const auto res = cfg.get_int("model.resolution", std::int64_t(spec.res_h));
  spec.res_h = spec.res_w = std::size_t(res);
  spec.dw_kernel = std::size_t(cfg.get_int("model.dw_kernel", std::int64_t(spec.dw_kernel)));
  spec.ffn_ratio = cfg.get_double("model.ffn_ratio", spec.ffn_ratio);
  spec.ffn_enabled = cfg.get_bool("model.ffn_enabled", spec.ffn_enabled);
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid model configuration: ") + e.what());
  }
  return spec;
}

TrainConfig train_config_from_config(const Config& cfg) {
  TrainConfig t;
  t.lr = cfg.get_double("train.lr", 0.0);
  t.lr_min = cfg.get_double("train.lr_min", t.lr_min);
  t.batch = std::size_t(cfg.get_int("train.batch", std::int64_t(t.batch)));
  t.epochs = std::size_t(cfg.get_int("train.epochs", std::int64_t(t.epochs)));
  t.warmup_epochs =
      std::size_t(cfg.get_int("train.warmup_epochs", std::int64_t(t.warmup_epochs)));
  t.weight_decay = cfg.get_double("train.weight_decay", t.weight_decay);
  t.label_smoothing = cfg.get_double("train.label_smoothing", t.label_smoothing);
  t.ema_decay = cfg.get_double("train.ema_decay", t.ema_decay);
  t.seed = std::uint64_t(cfg.get_int("train.seed", 1));
  t.subset = std::size_t(cfg.get_int("train.subset", 0));
  t.image_size = std::size_t(cfg.get_int("train.image_size", std::int64_t(t.image_size)));
  t.stop_at_train_top1 = cfg.get_double("train.stop_at_train_top1", 0.0);
  t.data_dir = cfg.get_str("train.data", "");
  t.out_dir = cfg.get_str("train.out", "runs/default");
  return t;
}

Precision precision_from_config(const Config& cfg) {
  const std::string p = cfg.get_str("model.precision", "f32");
  if (p == "f32") return Precision::f32;
  if (p == "f64") return Precision::f64;
  throw ConfigError("model.precision must be f32 or f64, got '" + p + "'");
}

Config load_config(const std::string& path, const std::vector<std::string>& sets,
                   const std::vector<std::string>& extras) {
  Config cfg = path.empty() ? Config{} : Config::from_file(path);
  for (const auto& s : sets) cfg.apply_override(s);
  // remaining tokens: --section.key value  or  --section.key=value
  for (std::size_t i = 0; i < extras.size(); ++i) {
    std::string tok = extras[i];
    if (tok.rfind("--", 0) != 0)
      throw ConfigError("unexpected argument '" + tok +
                        "' (overrides look like --section.key value)");
    tok = tok.substr(2);
    const auto eq = tok.find('=');
    if (eq != std::string::npos) {
      cfg.apply_override(tok);
    } else {
      if (i + 1 >= extras.size())
        throw ConfigError("override --" + tok + " is missing a value");
      cfg.apply_override(tok + "=" + extras[++i]);
    }
  }
  return cfg;
}

void echo_config(const Config& cfg) {
  const std::string e = cfg.echo();
  if (!e.empty()) std::cout << "# effective configuration\n" << e << "\n";
}

int cmd_verify(const std::string& precision, std::uint64_t seed,
               const std::string& inject, const std::string& repro_dir) {
  if (inject == "compose-sign") {
    set_scan_compose_fault(true);
  } else if (!inject.empty()) {
    throw ConfigError("unknown fault '" + inject + "' (expected compose-sign)");
  }
  Precision p;
  if (precision == "f32")
    p = Precision::f32;
  else if (precision == "f64")
    p = Precision::f64;
  else
    throw ConfigError("precision must be f32 or f64, got '" + precision + "'");

  set_finite_checks(true);
  auto suites = run_verify_suites(p, seed, repro_dir);
  set_finite_checks(false);
  std::cout << format_verify_report(suites, p, seed);
  for (const auto& s : suites)
    if (!s.pass) return kExitVerify;
  return kExitOk;
}

int cmd_params(const std::string& variant, const Config& cfg, bool calibrate,
               std::size_t target) {
  ModelSpec spec;
  if (variant.empty()) {
    spec = model_spec_from_config(cfg);
  } else {
    spec = ModelSpec::preset(variant);
  }
  if (calibrate) {
    const std::size_t want =
        target ? target : (spec.variant == "base" ? 86000000 : 30000000);
    auto cal = calibrate_width(spec, want);
    std::cout << "# width calibration against target " << want << " params\n";
    std::cout << "# D, total_params\n";
    for (auto& [d, n] : cal.sweep) std::cout << d << ", " << n << "\n";
    std::cout << "chosen D = " << cal.width << " (" << cal.params
              << " params, target " << want << ")\n\n";
    spec.base_width = cal.width;
  }
  const ParamBreakdown b = count_params_breakdown(spec);
  std::cout << "parameters for variant '" << spec.variant
            << "' (D=" << spec.base_width << ", depths " << spec.depths[0] << ","
            << spec.depths[1] << "," << spec.depths[2] << "," << spec.depths[3]
            << ", classes " << spec.num_classes << ")\n";
  std::cout << "  stem         " << b.stem << "\n";
  std::cout << "  pos-table    " << b.pos << "\n";
  for (int i = 0; i < 4; ++i)
    std::cout << "  stage" << (i + 1) << "       " << b.stages[i] << "\n";
  for (int i = 0; i < 3; ++i)
    std::cout << "  downsample" << (i + 1) << "  " << b.downsamples[i] << "\n";
  std::cout << "  head         " << b.head << "\n";
  std::cout << "  total        " << b.total() << "\n";
  return kExitOk;
}

int cmd_flops(const std::string& variant, std::size_t resolution,
              const Config& cfg) {
  ModelSpec spec =
      variant.empty() ? model_spec_from_config(cfg) : ModelSpec::preset(variant);
  const FlopReport r = count_flops(spec, resolution);
  std::cout << "# flops convention: 1 multiply-accumulate = 1 FLOP, "
               "elementwise 1 FLOP/elt, layer norm 8/elt, scan 9/elt\n";
  std::cout << "analytic FLOPs, variant '" << spec.variant << "' (D="
            << spec.base_width << ") at " << resolution << "x" << resolution
            << "\n";
  for (const auto& it : r.items) {
    char line[128];
    std::snprintf(line, sizeof line, "  %-20s %14.6g\n", it.label.c_str(),
                  it.flops);
    std::cout << line;
  }
  char line[160];
  std::snprintf(line, sizeof line,
                "  total without head  %14.6g  (%.4g GFLOPs)\n",
                r.total_without_head, r.total_without_head / 1e9);
  std::cout << line;
  std::snprintf(line, sizeof line,
                "  total with head     %14.6g  (%.4g GFLOPs)\n",
                r.total_with_head, r.total_with_head / 1e9);
  std::cout << line;
  return kExitOk;
}

int cmd_train(const Config& cfg, const std::string& resume) {
  echo_config(cfg);
  const ModelSpec spec = model_spec_from_config(cfg);
  const TrainConfig t = train_config_from_config(cfg);
  if (t.data_dir.empty())
    throw DataError(
        "train.data is not set. Point it at a directory containing either "
        "train.bin (+ optional val.bin) or data_batch_1..5.bin + "
        "test_batch.bin in the CIFAR-10 binary layout.");
  auto print_row = [](const MetricRow& r) {
    std::cout << metric_csv_line(r) << "\n" << std::flush;
  };
  std::cout << "epoch,split,loss,top1,lr,seconds\n";
  TrainResult res;
  if (precision_from_config(cfg) == Precision::f64)
    res = train_loop<double>(spec, t, resume, nullptr, print_row);
  else
    res = train_loop<float>(spec, t, resume, nullptr, print_row);
  std::cout << "best " << (res.best_checkpoint.empty() ? "(unsaved)" : res.best_checkpoint)
            << " top1 " << res.best_val_top1 << " at epoch " << res.best_epoch
            << "\n";
  if (!t.out_dir.empty())
    std::cout << "metrics: " << (std::filesystem::path(t.out_dir) / "metrics.csv").string()
              << "\n";
  return kExitOk;
}

template <typename T>
int eval_impl(const ModelSpec& spec, const TrainConfig& t,
              const std::string& checkpoint, bool use_ema) {
  Cifar10 ds = load_cifar10(t.data_dir);
  if (t.subset > 0) ds.train.truncate(t.subset);
  if (ds.val.count() == 0) throw DataError("no validation split found");
  const NormStats stats = compute_norm_stats(ds.train);

  Backbone<T> model(spec);
  AdamW<T> opt;  // unused slots, not loaded
  Ema<T> ema(0.9999);
  ema.attach(model.params());
  (void)load_training_checkpoint<T>(checkpoint, model, nullptr, &ema);
  if (use_ema) {
    auto params = model.params();
    ema.copy_to(params);
  }
  auto [loss, top1] = evaluate(model, ds.val, stats, t.image_size, t.batch);
  std::cout << "eval " << (use_ema ? "(ema)" : "(last)") << " loss " << loss
            << " top1 " << top1 << "\n";
  return kExitOk;
}

int cmd_eval(const Config& cfg, const std::string& checkpoint, bool use_ema) {
  echo_config(cfg);
  const ModelSpec spec = model_spec_from_config(cfg);
  const TrainConfig t = train_config_from_config(cfg);
  if (t.data_dir.empty()) throw DataError("train.data is not set");
  if (precision_from_config(cfg) == Precision::f64)
    return eval_impl<double>(spec, t, checkpoint, use_ema);
  return eval_impl<float>(spec, t, checkpoint, use_ema);
}

int cmd_bench(const Config& cfg, const std::string& mode) {
  echo_config(cfg);
  const ModelSpec spec = model_spec_from_config(cfg);
  const std::string out = cfg.get_str("bench.out", "bench_report");
  const Precision prec = precision_from_config(cfg);

  SweepConfig sweep;
  {
    auto rs = cfg.get_int_list("bench.resolutions", {224, 448});
    sweep.resolutions.assign(rs.begin(), rs.end());
    sweep.reps = int(cfg.get_int("bench.reps", sweep.reps));
    sweep.warmup = int(cfg.get_int("bench.warmup", sweep.warmup));
    sweep.mem_limit_mb =
        std::size_t(cfg.get_int("bench.mem_limit_mb", std::int64_t(sweep.mem_limit_mb)));
    sweep.baseline_dim =
        std::size_t(cfg.get_int("bench.baseline_dim", std::int64_t(sweep.baseline_dim)));
    sweep.baseline_depth =
        std::size_t(cfg.get_int("bench.baseline_depth", std::int64_t(sweep.baseline_depth)));
    sweep.baseline_patch =
        std::size_t(cfg.get_int("bench.baseline_patch", std::int64_t(sweep.baseline_patch)));
  }
  ScanBenchConfig scan;
  {
    auto ls = cfg.get_int_list("bench.scan_lengths", {256, 1024, 4096, 16384, 65536});
    scan.lengths.assign(ls.begin(), ls.end());
    scan.lanes = std::size_t(cfg.get_int("bench.scan_lanes", std::int64_t(scan.lanes)));
    scan.reps = int(cfg.get_int("bench.reps", scan.reps));
    scan.warmup = int(cfg.get_int("bench.warmup", scan.warmup));
  }

  bool ok = true;
  if (mode == "sweep" || mode == "all") {
    BenchReport r = prec == Precision::f64
                        ? run_resolution_sweep<double>(spec, sweep)
                        : run_resolution_sweep<float>(spec, sweep);
    std::cout << format_bench_table(r) << "\n";
    write_bench_csv(r, out + "_sweep.csv");
    write_bench_dat(r, out + "_sweep.dat");
    std::cout << "wrote " << out << "_sweep.csv, " << out << "_sweep.dat\n";
  }
  if (mode == "scan" || mode == "all") {
    BenchReport r = prec == Precision::f64 ? run_scan_microbench<double>(scan)
                                           : run_scan_microbench<float>(scan);
    std::cout << format_bench_table(r) << "\n";
    write_bench_csv(r, out + "_scan.csv");
    write_bench_dat(r, out + "_scan.dat");
    std::cout << "wrote " << out << "_scan.csv, " << out << "_scan.dat\n";
    ok = ok && r.correctness_ok;
  }
  if (!ok) {
    std::cerr << "scan kernels disagreed on benchmarked inputs\n";
    return kExitVerify;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"VisionGRU: linear-complexity recurrent vision backbone"};
  app.require_subcommand(1);

  // verify
  auto* verify = app.add_subcommand("verify", "run the oracle suites");
  std::string v_precision = "f64";
  std::uint64_t v_seed = 1;
  std::string v_inject, v_repro = ".";
  verify->add_option("--precision", v_precision, "f32 or f64")
      ->capture_default_str();
  verify->add_option("--seed", v_seed, "suite seed")->capture_default_str();
  verify->add_option("--repro-dir", v_repro, "where failing cases are written")
      ->capture_default_str();
  verify->add_option("--inject-fault", v_inject,
                     "test-only fault injection (compose-sign)");

  // shared config plumbing
  std::string config_path, resume_path, checkpoint_path;
  std::vector<std::string> sets;
  bool use_ema = false;

  auto add_cfg = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "config file (key = value)");
    sub->add_option("--set", sets, "override, section.key=value");
    sub->allow_extras();
  };

  auto* train = app.add_subcommand("train", "train on a CIFAR-10-format dataset");
  add_cfg(train);
  train->add_option("--resume", resume_path, "checkpoint to resume from");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  add_cfg(eval);
  eval->add_option("--checkpoint", checkpoint_path, "checkpoint path")->required();
  eval->add_flag("--ema", use_ema, "score the EMA shadow weights");

  auto* params = app.add_subcommand("params", "parameter count report");
  std::string p_variant;
  bool p_calibrate = false;
  std::uint64_t p_target = 0;
  params->add_option("variant", p_variant, "tiny or base (omit with --config)");
  params->add_flag("--calibrate", p_calibrate, "sweep D and pick the best fit");
  params->add_option("--target", p_target, "calibration target parameter count");
  add_cfg(params);

  auto* flops = app.add_subcommand("flops", "analytic FLOPs report");
  std::string f_variant;
  std::uint64_t f_resolution = 224;
  flops->add_option("variant", f_variant, "tiny or base (omit with --config)");
  flops->add_option("resolution", f_resolution, "square input resolution");
  add_cfg(flops);

  auto* bench = app.add_subcommand("bench", "complexity benchmarks");
  std::string b_mode = "all";
  bench->add_option("--mode", b_mode, "sweep, scan, or all")
      ->capture_default_str();
  add_cfg(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (verify->parsed()) return cmd_verify(v_precision, v_seed, v_inject, v_repro);

    CLI::App* active = train->parsed()   ? train
                       : eval->parsed()  ? eval
                       : params->parsed() ? params
                       : flops->parsed()  ? flops
                                          : bench;
    Config cfg = load_config(config_path, sets, active->remaining());

    if (train->parsed()) return cmd_train(cfg, resume_path);
    if (eval->parsed()) return cmd_eval(cfg, checkpoint_path, use_ema);
    if (params->parsed())
      return cmd_params(p_variant, cfg, p_calibrate, std::size_t(p_target));
    if (flops->parsed())
      return cmd_flops(f_variant, std::size_t(f_resolution), cfg);
    if (bench->parsed()) return cmd_bench(cfg, b_mode);
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const VerificationFailure& e) {
    std::cerr << "verification failure: " << e.what() << "\n";
    return kExitVerify;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOther;
  }
}
