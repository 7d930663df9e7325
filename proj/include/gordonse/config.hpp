#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

namespace gordonse {

/// Flat key=value configuration with dotted section prefixes, e.g.
/// `model.kind=phase_retrieval`. Lines starting with '#' are comments.
class Config {
 public:
  Config() = default;
  static Config from_file(const std::filesystem::path& path);
  static Config from_string(const std::string& text);

  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::string get_string(const std::string& key,
                         std::optional<std::string> fallback = {}) const;
  double get_double(const std::string& key,
                    std::optional<double> fallback = {}) const;
  long long get_int(const std::string& key,
                    std::optional<long long> fallback = {}) const;
  bool get_bool(const std::string& key,
                std::optional<bool> fallback = {}) const;

  void set(const std::string& key, const std::string& value) {
    kv_[key] = value;
  }

  const std::map<std::string, std::string>& items() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace gordonse
