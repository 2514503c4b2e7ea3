#include "dsplit/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace dsplit {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_number(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v.empty()) throw ConfigError("config: empty numeric value for " + key);
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config: bad number '" + v + "' for " + key);
  }
  if (pos != v.size())
    throw ConfigError("config: trailing junk in number '" + v + "' for " + key);
  return out;
}

}  // namespace

Config Config::parse(std::istream& in, const std::string& origin) {
  Config cfg;
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(lineno) +
                          ": unterminated section header");
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty())
        throw ConfigError(origin + ":" + std::to_string(lineno) +
                          ": empty section name");
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    cfg.kv_[section.empty() ? key : section + "." + key] = value;
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  return parse(in, path);
}

Config Config::parse_string(const std::string& text) {
  std::istringstream in(text);
  return parse(in, "<string>");
}

bool Config::has(const std::string& key) const { return kv_.count(key) != 0; }

std::string Config::get_str(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) throw ConfigError("config: missing key " + key);
  return it->second;
}

std::string Config::get_str(const std::string& key,
                            const std::string& fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double Config::get_num(const std::string& key) const {
  return parse_number(key, get_str(key));
}

double Config::get_num(const std::string& key, double fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : parse_number(key, it->second);
}

long long Config::get_int(const std::string& key) const {
  const double v = get_num(key);
  const long long r = static_cast<long long>(v);
  if (static_cast<double>(r) != v)
    throw ConfigError("config: expected integer for " + key);
  return r;
}

long long Config::get_int(const std::string& key, long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get_str(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: expected boolean for " + key);
}

std::vector<double> Config::get_num_list(const std::string& key) const {
  const std::string raw = get_str(key);
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= raw.size()) {
    std::size_t comma = raw.find(',', start);
    if (comma == std::string::npos) comma = raw.size();
    const std::string piece = trim(raw.substr(start, comma - start));
    if (!piece.empty()) out.push_back(parse_number(key, piece));
    start = comma + 1;
  }
  if (out.empty()) throw ConfigError("config: empty list for " + key);
  return out;
}

void Config::set(const std::string& key, const std::string& value) {
  kv_[key] = value;
}

void Config::merge_overlay(const Config& other) {
  for (const auto& [k, v] : other.kv_) kv_[k] = v;
}

std::string Config::serialize() const {
  std::ostringstream out;
  // sectionless keys first so they don't re-parse under a preceding section
  for (const auto& [k, v] : kv_)
    if (k.find('.') == std::string::npos) out << k << " = " << v << "\n";
  std::string current_section;
  for (const auto& [k, v] : kv_) {
    const std::size_t dot = k.find('.');
    if (dot == std::string::npos) continue;
    const std::string section = k.substr(0, dot);
    if (section != current_section) {
      out << "\n[" << section << "]\n";
      current_section = section;
    }
    out << k.substr(dot + 1) << " = " << v << "\n";
  }
  return out.str();
}

}  // namespace dsplit
