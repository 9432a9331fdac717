#pragma once

// Minimal ini-style config reader.  Lines are `key = value` grouped under
// `[section]` headers, `#` starts a comment, blank lines are ignored.
// Lookups use dotted keys ("optimizer.beta1").  Every key present in the
// file must appear in the accepted-key registry passed to ensure_known;
// anything else is a hard error so typos never silently fall back to
// defaults.

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "adamhp/problems.hpp"

namespace adamhp {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class Config {
 public:
  static Config parse(const std::string& text) {
    Config cfg;
    cfg.raw_ = text;
    std::string section;
    std::size_t pos = 0;
    int lineno = 0;
    while (pos <= text.size()) {
      std::size_t nl = text.find('\n', pos);
      std::string line = text.substr(pos, nl == std::string::npos ? nl : nl - pos);
      pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
      ++lineno;
      std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']' || line.size() < 3)
          throw ConfigError("line " + std::to_string(lineno) + ": malformed section header '" + line + "'");
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      std::size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("line " + std::to_string(lineno) + ": expected key = value, got '" + line + "'");
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      if (key.empty())
        throw ConfigError("line " + std::to_string(lineno) + ": empty key");
      if (!section.empty()) key = section + "." + key;
      if (cfg.values_.count(key))
        throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
      cfg.values_[key] = value;
    }
    return cfg;
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_str(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_num(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return parse_num(key, it->second);
  }

  long get_int(const std::string& key, long fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    double v = parse_num(key, it->second);
    long n = static_cast<long>(v);
    if (static_cast<double>(n) != v)
      throw ConfigError("key '" + key + "': expected an integer, got '" + it->second + "'");
    return n;
  }

  std::vector<double> get_num_list(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return {};
    std::vector<double> out;
    for (const std::string& piece : detail::split(it->second, ','))
      out.push_back(parse_num(key, trim(piece)));
    return out;
  }

  std::vector<long> get_int_list(const std::string& key) const {
    std::vector<long> out;
    for (double v : get_num_list(key)) {
      long n = static_cast<long>(v);
      if (static_cast<double>(n) != v)
        throw ConfigError("key '" + key + "': expected integers");
      out.push_back(n);
    }
    return out;
  }

  // Rejects any key absent from `allowed`, naming the offender.
  void ensure_known(const std::vector<std::string>& allowed) const {
    for (const auto& [key, value] : values_) {
      bool ok = false;
      for (const std::string& a : allowed)
        if (a == key) { ok = true; break; }
      if (!ok) throw ConfigError("unknown config key '" + key + "'");
    }
  }

  const std::string& raw() const { return raw_; }

 private:
  static std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  static double parse_num(const std::string& key, const std::string& text) {
    try {
      std::size_t used = 0;
      double v = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("key '" + key + "': not a number: '" + text + "'");
    }
  }

  std::map<std::string, std::string> values_;
  std::string raw_;
};

}  // namespace adamhp
