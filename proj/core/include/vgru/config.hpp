// Copyright 2026 The VisionGRU Authors. Apache 2.0 License.
//
// Flat `key = value` configuration with [model] / [train] / [bench]
// sections. Unknown keys are hard errors, and the effective values are
// echoed into the run log so every run is auditable.

#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace vgru {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Config {
 public:
  Config();

  static Config from_file(const std::string& path);

  // "section.key=value" or ("section.key", "value")
  void set(const std::string& dotted_key, const std::string& value);
  void apply_override(const std::string& assignment);

  bool has(const std::string& key) const;
  std::string get_str(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::int64_t> get_int_list(const std::string& key,
                                         std::vector<std::int64_t> fallback) const;

  // Sorted "key = value" lines of everything that was set.
  std::string echo() const;

 private:
  void check_known(const std::string& key) const;

  std::map<std::string, std::string> values_;
};

}  // namespace vgru
