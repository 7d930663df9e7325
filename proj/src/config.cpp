#include "gordonse/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace gordonse {

namespace {

std::string trim(const std::string& s) {
  auto b = s.begin(), e = s.end();
  while (b != e && std::isspace(static_cast<unsigned char>(*b))) ++b;
  while (e != b && std::isspace(static_cast<unsigned char>(*(e - 1)))) --e;
  return {b, e};
}

}  // namespace

Config Config::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

Config Config::from_string(const std::string& text) {
  Config c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": expected key=value");
    const std::string key = trim(t.substr(0, eq));
    if (key.empty())
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": empty key");
    c.kv_[key] = trim(t.substr(eq + 1));
  }
  return c;
}

std::string Config::get_string(const std::string& key,
                               std::optional<std::string> fallback) const {
  const auto it = kv_.find(key);
  if (it != kv_.end()) return it->second;
  if (fallback) return *fallback;
  throw std::runtime_error("config: missing key '" + key + "'");
}

double Config::get_double(const std::string& key,
                          std::optional<double> fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) {
    if (fallback) return *fallback;
    throw std::runtime_error("config: missing key '" + key + "'");
  }
  std::size_t pos = 0;
  const double v = std::stod(it->second, &pos);
  if (pos != it->second.size())
    throw std::runtime_error("config: key '" + key + "' is not a number");
  return v;
}

long long Config::get_int(const std::string& key,
                          std::optional<long long> fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) {
    if (fallback) return *fallback;
    throw std::runtime_error("config: missing key '" + key + "'");
  }
  std::size_t pos = 0;
  const long long v = std::stoll(it->second, &pos);
  if (pos != it->second.size())
    throw std::runtime_error("config: key '" + key + "' is not an integer");
  return v;
}

bool Config::get_bool(const std::string& key,
                      std::optional<bool> fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) {
    if (fallback) return *fallback;
    throw std::runtime_error("config: missing key '" + key + "'");
  }
  std::string v = it->second;
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::runtime_error("config: key '" + key + "' is not a boolean");
}

}  // namespace gordonse
