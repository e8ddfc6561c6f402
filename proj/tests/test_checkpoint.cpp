// Copyright 2026 The VisionGRU Authors. Apache 2.0 License.

#include <doctest.h>

#include <cstring>

#include "support.hpp"
#include "vgru/train.hpp"

using namespace vgru;
using namespace vgru_test;

TEST_SUITE_BEGIN("checkpoint");

namespace {

std::vector<char> slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is);
  return std::vector<char>(std::istreambuf_iterator<char>(is),
                           std::istreambuf_iterator<char>());
}

ModelSpec mini_spec() {
  ModelSpec spec;
  spec.variant = "mini";
  spec.base_width = 8;
  spec.depths = {1, 1, 0, 0};
  spec.res_h = spec.res_w = 32;
  spec.num_classes = 10;
  return spec;
}

}  // namespace

TEST_CASE("tensor round trip is bitwise exact for every dtype") {
  Rng rng = stream(120, "c.rt");
  Tensor<float> f = random_tensor<float>({3, 5}, rng, -100, 100);
  Tensor<double> d = random_tensor<double>({2, 2, 2}, rng, -1e9, 1e9);
  Tensor<std::int64_t> i({4});
  for (std::size_t k = 0; k < 4; ++k) i[k] = std::int64_t(rng.next_u64());

  const std::string path = temp_dir("ckpt") + "/rt.vgru";
  Checkpoint ck;
  ck.put("f", f);
  ck.put("d", d);
  ck.put("i", i);
  ck.put_i64("scalar", -7);
  ck.put_f64("pi", 3.14159);
  ck.save(path);

  Checkpoint in = Checkpoint::load(path);
  Tensor<float> f2 = in.get<float>("f");
  Tensor<double> d2 = in.get<double>("d");
  Tensor<std::int64_t> i2 = in.get<std::int64_t>("i");
  CHECK(std::memcmp(f.data(), f2.data(), f.numel() * 4) == 0);
  CHECK(std::memcmp(d.data(), d2.data(), d.numel() * 8) == 0);
  CHECK(std::memcmp(i.data(), i2.data(), i.numel() * 8) == 0);
  CHECK(in.get_i64("scalar") == -7);
  CHECK(in.get_f64("pi") == 3.14159);
  CHECK(in.names().size() == 5);
  CHECK(f2.shape() == std::vector<std::size_t>{3, 5});

  // dtype confusion is rejected
  CHECK_THROWS_AS(in.get<double>("f"), std::runtime_error);
}

TEST_CASE("corrupted and truncated files are rejected") {
  const std::string dir = temp_dir("ckpt_bad");
  {
    std::ofstream os(dir + "/notmagic.vgru", std::ios::binary);
    os << "XXXXsomething";
  }
  CHECK_THROWS_WITH_AS(Checkpoint::load(dir + "/notmagic.vgru"),
                       doctest::Contains("not a VGRU"), std::runtime_error);

  Checkpoint ck;
  Tensor<float> t({64});
  ck.put("t", t);
  ck.save(dir + "/ok.vgru");
  auto bytes = slurp(dir + "/ok.vgru");
  bytes.resize(bytes.size() - 32);
  {
    std::ofstream os(dir + "/trunc.vgru", std::ios::binary);
    os.write(bytes.data(), std::streamsize(bytes.size()));
  }
  CHECK_THROWS_AS(Checkpoint::load(dir + "/trunc.vgru"), std::runtime_error);
}

TEST_CASE("training state round trip: reload then re-save is byte identical") {
  const std::string dir = temp_dir("ckpt_train");
  write_synthetic_cifar(dir + "/train.bin", 32, 9);

  const ModelSpec spec = mini_spec();
  TrainConfig cfg;
  cfg.lr = 1e-3;
  cfg.batch = 16;
  cfg.epochs = 2;
  cfg.warmup_epochs = 1;
  cfg.seed = 5;
  cfg.image_size = 32;
  cfg.data_dir = dir;
  cfg.out_dir = dir + "/runA";
  TrainResult res = train_loop<float>(spec, cfg);
  REQUIRE(!res.last_checkpoint.empty());

  Backbone<float> model(spec);
  AdamW<float> opt({}, {});
  opt.attach(model.params());
  Ema<float> ema(cfg.ema_decay);
  ema.attach(model.params());
  auto rs = load_training_checkpoint<float>(res.last_checkpoint, model, &opt, &ema);
  CHECK(rs.epoch == 1);

  const std::string again = dir + "/again.vgru";
  save_training_checkpoint(again, model, opt, ema, rs.epoch,
                           config_hash(spec, cfg), cfg.seed, rs.best_val,
                           rs.best_epoch);
  CHECK(slurp(res.last_checkpoint) == slurp(again));
}

TEST_CASE("wrong-config resume is refused") {
  const std::string dir = temp_dir("ckpt_hash");
  write_synthetic_cifar(dir + "/train.bin", 32, 9);
  const ModelSpec spec = mini_spec();
  TrainConfig cfg;
  cfg.lr = 1e-3;
  cfg.batch = 16;
  cfg.epochs = 2;
  cfg.warmup_epochs = 1;
  cfg.seed = 5;
  cfg.image_size = 32;
  cfg.data_dir = dir;
  cfg.out_dir = dir + "/run";
  TrainResult res = train_loop<float>(spec, cfg);

  TrainConfig other = cfg;
  other.lr = 2e-3;  // different schedule, different hash
  CHECK_THROWS_WITH_AS(
      train_loop<float>(spec, other, res.last_checkpoint),
      doctest::Contains("different configuration"), std::runtime_error);
}

TEST_CASE("resume reproduces the unbroken run exactly") {
  const std::string dir = temp_dir("resume");
  write_synthetic_cifar(dir + "/train.bin", 48, 13);
  write_synthetic_cifar(dir + "/val.bin", 32, 14);

  const ModelSpec spec = mini_spec();
  TrainConfig cfg;
  cfg.lr = 1e-3;
  cfg.batch = 16;
  cfg.epochs = 4;
  cfg.warmup_epochs = 1;
  cfg.seed = 17;
  cfg.image_size = 32;
  cfg.data_dir = dir;

  TrainConfig full = cfg;
  full.out_dir = dir + "/full";
  TrainResult unbroken = train_loop<float>(spec, full);
  REQUIRE(unbroken.rows.size() == 8);  // train+val rows for 4 epochs

  // interrupted run: identical schedule, stopped after two epochs
  TrainConfig inter = cfg;
  inter.out_dir = dir + "/inter";
  inter.run_epochs_cap = 2;
  TrainResult head = train_loop<float>(spec, inter);
  REQUIRE(head.rows.size() == 4);

  TrainConfig tail_cfg = cfg;
  tail_cfg.out_dir = dir + "/tail";
  TrainResult tail =
      train_loop<float>(spec, tail_cfg, head.last_checkpoint);
  REQUIRE(tail.rows.size() == 4);  // epochs 2..3

  // head rows match the unbroken prefix, tail rows the unbroken suffix
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(head.rows[i].loss == unbroken.rows[i].loss);
    CHECK(head.rows[i].top1 == unbroken.rows[i].top1);
    CHECK(head.rows[i].lr == unbroken.rows[i].lr);
    CHECK(tail.rows[i].epoch == unbroken.rows[i + 4].epoch);
    CHECK(tail.rows[i].loss == unbroken.rows[i + 4].loss);
    CHECK(tail.rows[i].top1 == unbroken.rows[i + 4].top1);
    CHECK(tail.rows[i].lr == unbroken.rows[i + 4].lr);
  }

  // final persisted state is byte-identical to the unbroken run's
  CHECK(slurp(tail.last_checkpoint) == slurp(unbroken.last_checkpoint));
}

TEST_SUITE_END();
