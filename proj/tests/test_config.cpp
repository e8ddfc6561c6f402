// Copyright 2026 The VisionGRU Authors. Apache 2.0 License.

#include <doctest.h>

#include "support.hpp"
#include "vgru/config.hpp"

using namespace vgru;
using namespace vgru_test;

TEST_SUITE_BEGIN("config");

namespace {

std::string write_cfg(const std::string& name, const std::string& body) {
  const std::string path = temp_dir("config") + "/" + name;
  std::ofstream os(path, std::ios::trunc);
  os << body;
  return path;
}

}  // namespace

TEST_CASE("sections, comments, and typed getters") {
  const std::string path = write_cfg("ok.cfg",
                                     "# a comment\n"
                                     "[model]\n"
                                     "variant = tiny\n"
                                     "d = 32            ; trailing comment\n"
                                     "depths = 2,2,8,2\n"
                                     "ffn_enabled = true\n"
                                     "\n"
                                     "[train]\n"
                                     "lr = 1e-3\n"
                                     "batch = 128\n"
                                     "train.seed = 9\n");
  Config cfg = Config::from_file(path);
  CHECK(cfg.get_str("model.variant", "") == "tiny");
  CHECK(cfg.get_int("model.d", 0) == 32);
  CHECK(cfg.get_bool("model.ffn_enabled", false));
  CHECK(cfg.get_double("train.lr", 0) == doctest::Approx(1e-3));
  CHECK(cfg.get_int("train.seed", 0) == 9);
  auto depths = cfg.get_int_list("model.depths", {});
  REQUIRE(depths.size() == 4);
  CHECK(depths[2] == 8);
  // defaults pass through for unset keys
  CHECK(cfg.get_int("train.subset", 0) == 0);
}

TEST_CASE("unknown keys are rejected everywhere") {
  const std::string path = write_cfg("bad.cfg", "[model]\nwidht = 3\n");
  CHECK_THROWS_WITH_AS(Config::from_file(path), doctest::Contains("widht"),
                       ConfigError);
  Config cfg;
  CHECK_THROWS_AS(cfg.set("model.nope", "1"), ConfigError);
  CHECK_THROWS_AS(cfg.apply_override("train.l_r=1"), ConfigError);
  CHECK_THROWS_AS(cfg.get_int("bench.repz", 1), ConfigError);
}

TEST_CASE("malformed lines carry the location") {
  const std::string path = write_cfg("mal.cfg", "[model]\nno equals here\n");
  CHECK_THROWS_WITH_AS(Config::from_file(path), doctest::Contains(":2"),
                       ConfigError);
  const std::string nosec = write_cfg("nosec.cfg", "d = 3\n");
  CHECK_THROWS_AS(Config::from_file(nosec), ConfigError);
}

TEST_CASE("overrides win over file values") {
  const std::string path = write_cfg("ovr.cfg", "[model]\nd = 32\n");
  Config cfg = Config::from_file(path);
  cfg.apply_override("model.d=64");
  CHECK(cfg.get_int("model.d", 0) == 64);
}

TEST_CASE("echo lists every effective value") {
  Config cfg;
  cfg.set("model.d", "48");
  cfg.set("train.batch", "32");
  const std::string e = cfg.echo();
  CHECK(e.find("model.d = 48") != std::string::npos);
  CHECK(e.find("train.batch = 32") != std::string::npos);
}

TEST_CASE("type errors are reported with the key") {
  Config cfg;
  cfg.set("train.lr", "fast");
  CHECK_THROWS_WITH_AS(cfg.get_double("train.lr", 0),
                       doctest::Contains("train.lr"), ConfigError);
  cfg.set("model.ffn_enabled", "maybe");
  CHECK_THROWS_AS(cfg.get_bool("model.ffn_enabled", true), ConfigError);
}

TEST_SUITE_END();
