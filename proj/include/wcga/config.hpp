#pragma once

// Strict reading of JSON configuration objects: every key must be consumed,
// and type errors name the offending field.

#include <set>
#include <string>
#include <utility>

#include <json.hpp>

#include "wcga/core.hpp"

namespace wcga {

struct ConfigError : ParameterError {
  using ParameterError::ParameterError;
};

class ConfigReader {
 public:
  ConfigReader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where("") + ": expected an object");
  }

  [[nodiscard]] bool has(const std::string& key) const { return j_.contains(key); }

  template <class T>
  T get(const std::string& key, T fallback) {
    if (!j_.contains(key)) {
      seen_.insert(key);
      return fallback;
    }
    return require<T>(key);
  }

  template <class T>
  T require(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError(where(key) + ": missing required field");
    try {
      return j_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(where(key) + ": " + e.what());
    }
  }

  /// Nested reader for an object-valued field; absent fields read as {}.
  ConfigReader child(const std::string& key) {
    seen_.insert(key);
    static const nlohmann::json empty = nlohmann::json::object();
    if (!j_.contains(key)) return {empty, where(key)};
    return {j_.at(key), where(key)};
  }

  const nlohmann::json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  /// Fails on keys nobody asked for.
  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.contains(k)) throw ConfigError(where(k) + ": unknown field");
    }
  }

  [[nodiscard]] std::string where(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace wcga
