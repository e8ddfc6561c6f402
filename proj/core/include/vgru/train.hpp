// Copyright 2026 The VisionGRU Authors. Apache 2.0 License.
//
// Desk-scale training: AdamW + cosine schedule + EMA over the backbone,
// with per-epoch metrics, best/last checkpoints, and bitwise-reproducible
// resumption. Everything except wall-clock timings is a pure function of
// (config, seed).

#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>

#include "vgru/backbone.hpp"
#include "vgru/checkpoint.hpp"
#include "vgru/dataset.hpp"
#include "vgru/optim.hpp"

namespace vgru {

struct TrainConfig {
  double lr = 0;  // 0 = scaling rule 1e-3 * batch / 1024
  double lr_min = 1e-5;
  std::size_t batch = 128;
  std::size_t epochs = 50;
  std::size_t warmup_epochs = 5;
  double weight_decay = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double label_smoothing = 0.1;
  double ema_decay = 0.9999;
  std::uint64_t seed = 1;
  std::size_t subset = 0;  // 0 = all records
  std::size_t image_size = 64;
  double stop_at_train_top1 = 0;  // 0 = run all epochs
  std::size_t run_epochs_cap = 0;  // stop after N epochs without changing the
                                   // schedule; simulates an interrupted run
  std::string data_dir;
  std::string out_dir;

  double effective_lr() const { return lr > 0 ? lr : scaled_lr(batch); }
};

struct MetricRow {
  std::size_t epoch;
  std::string split;
  double loss;
  double top1;
  double lr;
  double seconds;
};

inline std::string metric_csv_line(const MetricRow& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu,%s,%.9g,%.6f,%.9g,%.3f", r.epoch,
                r.split.c_str(), r.loss, r.top1, r.lr, r.seconds);
  return buf;
}

inline void write_metrics_csv(const std::vector<MetricRow>& rows,
                              const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write metrics file: " + path);
  os << "epoch,split,loss,top1,lr,seconds\n";
  for (const auto& r : rows) os << metric_csv_line(r) << "\n";
}

struct TrainResult {
  std::vector<MetricRow> rows;
  double best_val_top1 = 0;
  std::size_t best_epoch = 0;
  double final_train_top1 = 0;
  std::string last_checkpoint, best_checkpoint;
};

inline std::uint64_t config_hash(const ModelSpec& spec, const TrainConfig& cfg) {
  std::ostringstream os;
  os << spec.variant << '|' << spec.base_width << '|' << spec.num_classes << '|'
     << spec.res_h << 'x' << spec.res_w << '|' << spec.dw_kernel << '|'
     << spec.ffn_ratio << '|' << spec.ffn_enabled;
  for (auto d : spec.depths) os << ',' << d;
  os << '|' << cfg.effective_lr() << '|' << cfg.lr_min << '|' << cfg.batch << '|'
     << cfg.epochs << '|' << cfg.warmup_epochs << '|' << cfg.weight_decay << '|'
     << cfg.beta2 << '|' << cfg.label_smoothing << '|' << cfg.ema_decay << '|'
     << cfg.seed << '|' << cfg.subset << '|' << cfg.image_size;
  return fnv1a64(os.str());
}

// ---------------------------------------------------------------------------
// Checkpoint assembly

template <typename T>
void save_training_checkpoint(const std::string& path, Backbone<T>& model,
                              AdamW<T>& opt, Ema<T>& ema, std::int64_t epoch,
                              std::uint64_t cfg_hash, std::uint64_t seed,
                              double best_val, std::int64_t best_epoch) {
  Checkpoint ck;
  auto params = model.params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    ck.put("param/" + params[i]->name, params[i]->value);
    ck.put("opt/m/" + params[i]->name, opt.moment1(i));
    ck.put("opt/v/" + params[i]->name, opt.moment2(i));
    ck.put("ema/" + params[i]->name, ema.shadow(i));
  }
  ck.put_i64("opt/step", opt.step_count());
  ck.put_i64("meta/epoch", epoch);
  ck.put_i64("meta/seed", std::int64_t(seed));
  ck.put_i64("meta/config_hash", std::int64_t(cfg_hash));
  ck.put_f64("meta/best_val_top1", best_val);
  ck.put_i64("meta/best_epoch", best_epoch);
  ck.put_i64("meta/scalar_bytes", std::int64_t(sizeof(T)));
  ck.save(path);
}

template <typename T>
struct ResumeState {
  std::int64_t epoch = -1;
  double best_val = 0;
  std::int64_t best_epoch = 0;
};

template <typename T>
ResumeState<T> load_training_checkpoint(const std::string& path,
                                        Backbone<T>& model, AdamW<T>* opt,
                                        Ema<T>* ema,
                                        std::uint64_t expect_hash = 0,
                                        bool check_hash = false) {
  Checkpoint ck = Checkpoint::load(path);
  if (ck.get_i64("meta/scalar_bytes") != std::int64_t(sizeof(T)))
    throw std::runtime_error(
        "checkpoint precision differs from the requested precision");
  if (check_hash &&
      std::uint64_t(ck.get_i64("meta/config_hash")) != expect_hash)
    throw std::runtime_error(
        "checkpoint was produced by a different configuration; refusing to "
        "resume");
  auto params = model.params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor<T> v = ck.get<T>("param/" + params[i]->name);
    if (!v.same_shape(params[i]->value))
      throw std::runtime_error("checkpoint shape mismatch for " +
                               params[i]->name);
    params[i]->value = std::move(v);
    if (opt) {
      opt->moment1(i) = ck.get<T>("opt/m/" + params[i]->name);
      opt->moment2(i) = ck.get<T>("opt/v/" + params[i]->name);
    }
    if (ema) ema->shadow(i) = ck.get<T>("ema/" + params[i]->name);
  }
  if (opt) opt->set_step_count(ck.get_i64("opt/step"));
  ResumeState<T> rs;
  rs.epoch = ck.get_i64("meta/epoch");
  rs.best_val = ck.get_f64("meta/best_val_top1");
  rs.best_epoch = ck.get_i64("meta/best_epoch");
  return rs;
}

// ---------------------------------------------------------------------------

template <typename T>
std::pair<double, double> evaluate(const Backbone<T>& model,
                                   const LabeledImages& data,
                                   const NormStats& stats,
                                   std::size_t image_size, std::size_t batch) {
  if (data.count() == 0) return {0.0, 0.0};
  double loss_sum = 0;
  std::size_t correct = 0;
  const std::size_t n = data.count();
  for (std::size_t off = 0; off < n; off += batch) {
    const std::size_t b = std::min(batch, n - off);
    std::vector<std::size_t> idx(b);
    for (std::size_t i = 0; i < b; ++i) idx[i] = off + i;
    std::vector<int> labels;
    Tensor<T> x = make_batch<T>(data, idx, stats, image_size, &labels);
    Tensor<T> logits = model.forward(x);
    loss_sum += softmax_xent(logits, labels, 0.0) * double(b);
    const std::size_t k = logits.extent(1);
    for (std::size_t i = 0; i < b; ++i) {
      const T* row = logits.data() + i * k;
      std::size_t arg = 0;
      for (std::size_t j = 1; j < k; ++j)
        if (row[j] > row[arg]) arg = j;
      if (int(arg) == labels[i]) ++correct;
    }
  }
  return {loss_sum / double(n), double(correct) / double(n)};
}

template <typename T>
TrainResult train_loop(const ModelSpec& spec, const TrainConfig& cfg,
                       const std::string& resume_path = "",
                       const Cifar10* preloaded = nullptr,
                       const std::function<void(const MetricRow&)>& on_row = {}) {
  spec.validate();
  if (cfg.batch == 0) throw std::invalid_argument("batch size must be >= 1");
  if (cfg.image_size % 32 != 0)
    throw std::invalid_argument("training image size must be divisible by 32");

  Cifar10 local;
  if (!preloaded) local = load_cifar10(cfg.data_dir);
  const Cifar10& ds0 = preloaded ? *preloaded : local;
  Cifar10 ds;
  ds.train = ds0.train;
  ds.val = ds0.val;
  if (cfg.subset > 0) ds.train.truncate(cfg.subset);
  if (ds.train.count() == 0) throw DataError("training split is empty");
  const NormStats stats = compute_norm_stats(ds.train);

  const std::size_t n = ds.train.count();
  const std::size_t spe = (n + cfg.batch - 1) / cfg.batch;
  ScheduleConfig sched{cfg.effective_lr(), cfg.lr_min, cfg.warmup_epochs * spe,
                       cfg.epochs * spe};
  AdamWConfig acfg{cfg.beta1, cfg.beta2, cfg.adam_eps, cfg.weight_decay};

  Backbone<T> model(spec);
  model.init(cfg.seed);
  auto params = model.params();
  AdamW<T> opt(acfg, sched);
  opt.attach(params);
  Ema<T> ema(cfg.ema_decay);
  ema.attach(params);

  const std::uint64_t hash = config_hash(spec, cfg);
  std::size_t start_epoch = 0;
  double best_val = -1;
  std::int64_t best_epoch = -1;
  if (!resume_path.empty()) {
    auto rs = load_training_checkpoint<T>(resume_path, model, &opt, &ema, hash,
                                          /*check_hash=*/true);
    start_epoch = std::size_t(rs.epoch + 1);
    best_val = rs.best_val;
    best_epoch = rs.best_epoch;
  }

  TrainResult result;
  if (!cfg.out_dir.empty())
    std::filesystem::create_directories(cfg.out_dir);
  const std::string last_path =
      cfg.out_dir.empty() ? "" : (std::filesystem::path(cfg.out_dir) / "last.vgru").string();
  const std::string best_path =
      cfg.out_dir.empty() ? "" : (std::filesystem::path(cfg.out_dir) / "best.vgru").string();

  for (std::size_t epoch = start_epoch; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng shuffle_rng = stream(cfg.seed, "shuffle", epoch);
    shuffle_rng.shuffle(order);

    double loss_sum = 0;
    std::size_t correct = 0;
    double lr_last = 0;
    for (std::size_t off = 0, step = 0; off < n; off += cfg.batch, ++step) {
      const std::size_t b = std::min(cfg.batch, n - off);
      std::vector<std::size_t> idx(order.begin() + std::ptrdiff_t(off),
                                   order.begin() + std::ptrdiff_t(off + b));
      std::vector<int> labels;
      Tensor<T> x = make_batch<T>(ds.train, idx, stats, cfg.image_size, &labels);

      Tape<T> tape;
      Tensor<T> logits = model.forward(x, &tape);
      Tensor<T> grad_logits;
      const double loss =
          softmax_xent(logits, labels, cfg.label_smoothing, &grad_logits);
      if (!std::isfinite(loss))
        throw std::runtime_error(
            "NaN/Inf loss at epoch " + std::to_string(epoch) + " step " +
            std::to_string(step) + " (global step " +
            std::to_string(opt.step_count()) + ")");

      for (auto* p : params) p->zero_grad();
      model.backward(tape, grad_logits);
      lr_last = opt.step(params);
      ema.update(params);

      loss_sum += loss * double(b);
      const std::size_t k = logits.extent(1);
      for (std::size_t i = 0; i < b; ++i) {
        const T* row = logits.data() + i * k;
        std::size_t arg = 0;
        for (std::size_t j = 1; j < k; ++j)
          if (row[j] > row[arg]) arg = j;
        if (int(arg) == labels[i]) ++correct;
      }
    }
    const double train_loss = loss_sum / double(n);
    const double train_top1 = double(correct) / double(n);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.rows.push_back({epoch, "train", train_loss, train_top1, lr_last, secs});
    result.final_train_top1 = train_top1;
    if (on_row) on_row(result.rows.back());

    double score = train_top1;
    if (ds.val.count() != 0) {
      const auto tv = std::chrono::steady_clock::now();
      auto [vloss, vtop1] =
          evaluate(model, ds.val, stats, cfg.image_size, cfg.batch);
      const double vsecs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - tv).count();
      result.rows.push_back({epoch, "val", vloss, vtop1, lr_last, vsecs});
      if (on_row) on_row(result.rows.back());
      score = vtop1;
    }

    if (!last_path.empty())
      save_training_checkpoint(last_path, model, opt, ema, std::int64_t(epoch),
                               hash, cfg.seed, best_val, best_epoch);
    if (score > best_val) {
      best_val = score;
      best_epoch = std::int64_t(epoch);
      if (!best_path.empty())
        save_training_checkpoint(best_path, model, opt, ema,
                                 std::int64_t(epoch), hash, cfg.seed, best_val,
                                 best_epoch);
    }
    if (cfg.stop_at_train_top1 > 0 && train_top1 >= cfg.stop_at_train_top1)
      break;
    if (cfg.run_epochs_cap > 0 && epoch + 1 >= start_epoch + cfg.run_epochs_cap)
      break;
  }

  result.best_val_top1 = best_val;
  result.best_epoch = std::size_t(best_epoch < 0 ? 0 : best_epoch);
  result.last_checkpoint = last_path;
  result.best_checkpoint = best_path;
  if (!cfg.out_dir.empty())
    write_metrics_csv(result.rows,
                      (std::filesystem::path(cfg.out_dir) / "metrics.csv").string());
  return result;
}

}  // namespace vgru
