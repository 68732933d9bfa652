#pragma once

#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "crrlearn/tensor.hpp"

namespace crrlearn {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};
class UnknownKeyError : public ConfigError {
 public:
  explicit UnknownKeyError(const std::string& key)
      : ConfigError("unknown config key: " + key), key(key) {}
  std::string key;
};

/// Every key any subcommand understands. Validation rejects the rest so
/// typos fail loudly instead of silently using a default.
inline const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys = {
      // dataset / corruption
      "in", "out", "ref", "count", "channels", "height", "width", "noise", "sigma", "miv",
      "operator", "kernel_size", "blur_strength", "keep_prob", "seed",
      // architecture
      "mid_ch", "num_ridges", "spline_knots", "knot_delta", "use_diff", "use_bias", "learn_scale",
      // trainer
      "gamma", "gamma_prime", "delta0", "delta", "m_n", "iterations", "B", "kernel_posterior",
      "kernel_prior", "checkpoint_every", "checkpoint_dir", "normalize_prior", "conv_step_scale",
      "spline_step_scale", "bias_step_scale", "warmstart_iters", "warmstart_step",
      "warmstart_count",
      // estimation
      "ckpt", "mmse_warmstart", "mmse_samples", "lambda", "lambda_grid", "map_iters", "map_step",
      "optimizer", "tv_eps",
      // misc
      "out_csv", "threads",
  };
  return keys;
}

/// Flat string map with duplicate-overrides semantics and consumption
/// tracking, so a run can echo exactly the settings it acted on.
class Config {
 public:
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  void validate() const {
    for (const auto& [k, v] : values_) {
      if (!known_config_keys().count(k)) throw UnknownKeyError(k);
    }
  }

  std::string get_string(const std::string& key, const std::string& def = "") const {
    auto it = values_.find(key);
    std::string v = it == values_.end() ? def : it->second;
    consumed_[key] = v;
    return v;
  }

  double get_double(const std::string& key, double def) const {
    auto it = values_.find(key);
    double v = def;
    if (it != values_.end()) {
      try {
        std::size_t pos = 0;
        v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ConfigError("key " + key + " is not a number: " + it->second);
      }
    }
    consumed_[key] = to_precise_string(v);
    return v;
  }

  long long get_int(const std::string& key, long long def) const {
    auto it = values_.find(key);
    long long v = def;
    if (it != values_.end()) {
      try {
        std::size_t pos = 0;
        v = std::stoll(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ConfigError("key " + key + " is not an integer: " + it->second);
      }
    }
    consumed_[key] = std::to_string(v);
    return v;
  }

  bool get_bool(const std::string& key, bool def) const {
    auto it = values_.find(key);
    bool v = def;
    if (it != values_.end()) {
      if (it->second == "true" || it->second == "1") {
        v = true;
      } else if (it->second == "false" || it->second == "0") {
        v = false;
      } else {
        throw ConfigError("key " + key + " is not a boolean: " + it->second);
      }
    }
    consumed_[key] = v ? "true" : "false";
    return v;
  }

  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& def) const {
    auto it = values_.find(key);
    std::vector<double> v = def;
    if (it != values_.end()) {
      v.clear();
      std::stringstream ss(it->second);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        try {
          v.push_back(std::stod(tok));
        } catch (const std::exception&) {
          throw ConfigError("key " + key + " has a non-numeric entry: " + tok);
        }
      }
      if (v.empty()) throw ConfigError("key " + key + " lists no values");
    }
    std::string echo;
    for (double d : v) echo += (echo.empty() ? "" : ",") + to_precise_string(d);
    consumed_[key] = echo;
    return v;
  }

  /// `key = value` lines consumed so far, sorted — the run-log payload.
  std::string echo_consumed() const {
    std::string out;
    for (const auto& [k, v] : consumed_) out += k + " = " + v + "\n";
    return out;
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  mutable std::map<std::string, std::string> consumed_;
};

/// One `key = value` per line; '#' starts a comment; later duplicates win.
inline Config parse_config(const std::string& text) {
  Config cfg;
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    std::size_t b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(ss, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("malformed config line " + std::to_string(lineno) + ": " + line);
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("empty key on config line " + std::to_string(lineno));
    }
    cfg.set(key, value);
  }
  return cfg;
}

/// Command-line `--key=value` tokens; these override file entries.
inline void apply_cli_overrides(Config& cfg, const std::vector<std::string>& args) {
  for (const std::string& a : args) {
    if (a.rfind("--", 0) != 0) throw ConfigError("expected --key=value, got: " + a);
    std::size_t eq = a.find('=');
    if (eq == std::string::npos || eq == 2) throw ConfigError("expected --key=value, got: " + a);
    cfg.set(a.substr(2, eq - 2), a.substr(eq + 1));
  }
}

}  // namespace crrlearn
