// Copyright 2026 The VisionGRU Authors. Apache 2.0 License.

#include "vgru/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace vgru {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "model.variant", "model.d", "model.depths", "model.num_classes",
      "model.resolution", "model.dw_kernel", "model.ffn_ratio",
      "model.ffn_enabled", "model.precision",
      "train.lr", "train.lr_min", "train.batch", "train.epochs",
      "train.warmup_epochs", "train.weight_decay", "train.label_smoothing",
      "train.ema_decay", "train.seed", "train.data", "train.out",
      "train.subset", "train.image_size", "train.stop_at_train_top1",
      "bench.resolutions", "bench.reps", "bench.warmup", "bench.scan_lengths",
      "bench.scan_lanes", "bench.mem_limit_mb", "bench.out",
      "bench.baseline_dim", "bench.baseline_depth", "bench.baseline_patch",
  };
  return keys;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

Config::Config() = default;

void Config::check_known(const std::string& key) const {
  if (!known_keys().count(key))
    throw ConfigError("unknown configuration key '" + key + "'");
}

Config Config::from_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  Config cfg;
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::size_t hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(path + ":" + std::to_string(lineno) +
                          ": malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected 'key = value', got '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.find('.') == std::string::npos) {
      if (section.empty())
        throw ConfigError(path + ":" + std::to_string(lineno) + ": key '" +
                          key + "' appears before any [section]");
      key = section + "." + key;
    }
    cfg.set(key, value);
  }
  return cfg;
}

void Config::set(const std::string& dotted_key, const std::string& value) {
  check_known(dotted_key);
  values_[dotted_key] = value;
}

void Config::apply_override(const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override must look like section.key=value, got '" +
                      assignment + "'");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

bool Config::has(const std::string& key) const { return values_.count(key) != 0; }

std::string Config::get_str(const std::string& key,
                            const std::string& fallback) const {
  check_known(key);
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  check_known(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' expects a number, got '" + it->second + "'");
  }
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
  check_known(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t pos = 0;
    long long v = std::stoll(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' expects an integer, got '" + it->second + "'");
  }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  check_known(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::string v = it->second;
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + key + "' expects a boolean, got '" + it->second + "'");
}

std::vector<std::int64_t> Config::get_int_list(
    const std::string& key, std::vector<std::int64_t> fallback) const {
  check_known(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<std::int64_t> out;
  std::stringstream ss(it->second);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    try {
      out.push_back(std::stoll(tok));
    } catch (const std::exception&) {
      throw ConfigError("key '" + key + "' expects a comma list of integers, got '" +
                        it->second + "'");
    }
  }
  if (out.empty())
    throw ConfigError("key '" + key + "' expects a non-empty list");
  return out;
}

std::string Config::echo() const {
  std::ostringstream os;
  for (const auto& [k, v] : values_) os << k << " = " << v << "\n";
  return os.str();
}

}  // namespace vgru
