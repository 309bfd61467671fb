// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgsheaf contributors

#pragma once

#include "kgsheaf/common.hpp"

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace kgsheaf {

/// Every recognised key with its default value. Keys absent from a config
/// file take these values and are reported as defaulted.
inline const nlohmann::json& config_defaults() {
  static const nlohmann::json d = nlohmann::json::parse(R"({
    "seed": 0,
    "paths": {
      "train": "", "inf_obs": "", "inf_est": "", "queries": "",
      "valid_obs": "", "valid_est": "", "valid_queries": "",
      "checkpoint": "", "embeddings": "", "out": "runs"
    },
    "model": {
      "family": "TransE", "dim": 32, "p": 2, "loss": "crossentropy",
      "lr": 0.01, "epochs": 100, "batch": 128, "negatives": 16,
      "margin": 1.0, "temperature": 1.0, "corruption": "tail"
    },
    "extension": {
      "mode": "semi_inductive", "method": "iterative", "alpha": 0.1,
      "max_iters": 1000, "tol": 0.0, "init": "normal", "normalized": true
    },
    "eval": {
      "ks": [1, 3, 10], "head_side": false, "holdout_fraction": 0.1
    }
  })");
  return d;
}

inline const std::set<std::string>& config_path_keys() {
  static const std::set<std::string> k{"paths.train",     "paths.inf_obs",       "paths.inf_est",
                                       "paths.queries",   "paths.valid_obs",     "paths.valid_est",
                                       "paths.valid_queries", "paths.checkpoint", "paths.embeddings"};
  return k;
}

/// Effective configuration: defaults merged with a file and command-line
/// overrides. Keys are dotted `section.key` paths.
class RunConfig {
 public:
  RunConfig() : doc_(config_defaults()) {
    for (const auto& key : all_keys()) defaulted_.insert(key);
  }

  /// Loads `path` (may be empty) and applies `section.key=value` overrides.
  /// Relative paths in the file resolve against the file's directory.
  static RunConfig load(const std::filesystem::path& path, const std::vector<std::string>& overrides = {}) {
    RunConfig c;
    if (!path.empty()) {
      std::ifstream in(path);
      if (!in) throw FileError("cannot open config " + path.string());
      nlohmann::json file;
      try {
        file = nlohmann::json::parse(in, nullptr, true, true);
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
      }
      if (!file.is_object()) throw UsageError(path.string() + ": config must be a JSON object");
      const auto base = path.parent_path();
      file.erase("defaulted");  // present in echoed configs
      for (const auto& [key, value] : flatten_doc(file)) {
        nlohmann::json v = value;
        if (config_path_keys().count(key) && v.is_string() && !v.get<std::string>().empty()) {
          std::filesystem::path p(v.get<std::string>());
          if (p.is_relative()) v = (base / p).lexically_normal().string();
        }
        c.set(key, v);
      }
    }
    for (const auto& o : overrides) c.apply_override(o);
    return c;
  }

  void set(const std::string& key, const nlohmann::json& value) {
    const auto ptr = pointer(key);
    const auto& d = config_defaults();
    if (!d.contains(ptr) || d.at(ptr).is_object()) throw UsageError("unknown config key '" + key + "'");
    check_type(key, d.at(ptr), value);
    doc_[ptr] = value;
    defaulted_.erase(key);
  }

  /// `section.key=value` with the value parsed as JSON, falling back to a
  /// plain string.
  void apply_override(std::string_view text) {
    if (text.substr(0, 2) == "--") text.remove_prefix(2);
    const auto eq = text.find('=');
    if (eq == std::string_view::npos || eq == 0) throw UsageError("override must look like section.key=value");
    const std::string key(text.substr(0, eq));
    const std::string raw(text.substr(eq + 1));
    nlohmann::json v;
    try {
      v = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::exception&) {
      v = raw;
    }
    const auto& d = config_defaults();
    if (d.contains(pointer(key)) && d.at(pointer(key)).is_string() && !v.is_string() && !v.is_array()) v = raw;
    set(key, v);
  }

  const nlohmann::json& at(const std::string& key) const {
    const auto ptr = pointer(key);
    if (!doc_.contains(ptr)) throw UsageError("unknown config key '" + key + "'");
    return doc_.at(ptr);
  }
  template <class T>
  T get(const std::string& key) const {
    const auto& v = at(key);
    if (v.is_array() && !config_defaults().at(pointer(key)).is_array())
      throw UsageError("config key '" + key + "' holds a list; lists are only accepted by the grid command");
    return v.get<T>();
  }
  std::string path(const std::string& key) const { return get<std::string>(key); }
  bool has_path(const std::string& key) const { return !path(key).empty(); }

  bool is_defaulted(const std::string& key) const { return defaulted_.count(key) != 0; }

  /// Scalar keys currently holding a list of candidate values.
  std::vector<std::string> grid_keys() const {
    std::vector<std::string> out;
    for (const auto& key : all_keys())
      if (doc_.at(pointer(key)).is_array() && !config_defaults().at(pointer(key)).is_array()) out.push_back(key);
    return out;
  }

  /// Cartesian product over grid keys, last key varying fastest.
  std::vector<RunConfig> expand_grid() const {
    std::vector<RunConfig> out{*this};
    for (const auto& key : grid_keys()) {
      const auto values = at(key);
      if (values.empty()) return {};
      std::vector<RunConfig> next;
      for (const auto& c : out)
        for (const auto& v : values) {
          RunConfig t = c;
          t.doc_[pointer(key)] = v;
          next.push_back(std::move(t));
        }
      out = std::move(next);
    }
    return out;
  }

  /// Checks that referenced files exist.
  void check_paths(const std::vector<std::string>& required = {}) const {
    for (const auto& key : required)
      if (!has_path(key)) throw UsageError("config key '" + key + "' is required for this command");
    for (const auto& key : config_path_keys()) {
      const auto& v = at(key);
      if (v.is_string() && !v.get<std::string>().empty() && !std::filesystem::exists(v.get<std::string>()))
        throw FileError(key + ": no such file '" + v.get<std::string>() + "'");
    }
  }

  /// Effective document plus the list of keys left at their defaults.
  nlohmann::json echo() const {
    nlohmann::json e = doc_;
    e["defaulted"] = nlohmann::json(std::vector<std::string>(defaulted_.begin(), defaulted_.end()));
    return e;
  }
  const nlohmann::json& document() const { return doc_; }

  static std::vector<std::string> all_keys() {
    std::vector<std::string> out;
    for (const auto& [k, v] : flatten_doc(config_defaults())) out.push_back(k);
    return out;
  }

 private:
  static nlohmann::json::json_pointer pointer(const std::string& key) {
    std::string p = "/" + key;
    for (auto& ch : p)
      if (ch == '.') ch = '/';
    try {
      return nlohmann::json::json_pointer(p);
    } catch (const nlohmann::json::exception&) {
      throw UsageError("malformed config key '" + key + "'");
    }
  }

  static std::vector<std::pair<std::string, nlohmann::json>> flatten_doc(const nlohmann::json& j,
                                                                         const std::string& prefix = "") {
    std::vector<std::pair<std::string, nlohmann::json>> out;
    for (const auto& [k, v] : j.items()) {
      const std::string key = prefix.empty() ? k : prefix + "." + k;
      if (v.is_object()) {
        auto sub = flatten_doc(v, key);
        out.insert(out.end(), sub.begin(), sub.end());
      } else {
        out.emplace_back(key, v);
      }
    }
    return out;
  }

  static bool same_kind(const nlohmann::json& def, const nlohmann::json& v) {
    if (def.is_boolean()) return v.is_boolean();
    if (def.is_number_integer()) return v.is_number_integer();
    if (def.is_number()) return v.is_number();
    if (def.is_string()) return v.is_string();
    if (def.is_array()) return v.is_array() && std::all_of(v.begin(), v.end(), [&](const auto& x) {
                                 return def.empty() || same_kind(def.front(), x);
                               });
    return false;
  }

  static void check_type(const std::string& key, const nlohmann::json& def, const nlohmann::json& v) {
    if (same_kind(def, v)) return;
    if (!def.is_array() && v.is_array() && !v.empty() &&
        std::all_of(v.begin(), v.end(), [&](const auto& x) { return same_kind(def, x); }))
      return;
    throw UsageError("config key '" + key + "' expects " + std::string(def.type_name()) + ", got " + v.dump());
  }

  nlohmann::json doc_;
  std::set<std::string> defaulted_;
};

}  // namespace kgsheaf
