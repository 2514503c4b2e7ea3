#pragma once

#include <istream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace dsplit {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Minimal TOML-style config: [section] headers, key = value lines, '#'
// comments, optional double quotes around values, comma-separated lists.
// Keys are addressed as "section.key". Overlays merge shallowly per key.
class Config {
 public:
  static Config parse(std::istream& in, const std::string& origin = "<stream>");
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  bool has(const std::string& key) const;
  std::string get_str(const std::string& key) const;
  std::string get_str(const std::string& key, const std::string& fallback) const;
  double get_num(const std::string& key) const;
  double get_num(const std::string& key, double fallback) const;
  long long get_int(const std::string& key) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_num_list(const std::string& key) const;

  void set(const std::string& key, const std::string& value);
  void merge_overlay(const Config& other);  // other's keys win
  std::string serialize() const;            // stable (sorted) section order

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace dsplit
