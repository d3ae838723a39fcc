#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace regbank::harness {

/// Flat `key=value` settings with dotted keys. Lines starting with '#' and
/// blank lines are ignored; later assignments win.
class Config {
 public:
  static Config from_file(const std::string& path);
  static Config from_text(const std::string& text);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  /// "key=value"; ParseError when there is no '='.
  void apply_override(const std::string& assignment);
  /// REGBANK_SEED replaces `seed` when present in the environment.
  void apply_environment();

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<std::string> get_strings(const std::string& key, const std::vector<std::string>& fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  /// Sorted `key=value` lines.
  std::string dump() const;

 private:
  std::map<std::string, std::string> values_;
};

std::vector<std::string> split(const std::string& s, char sep);
std::string trim(const std::string& s);

}  // namespace regbank::harness
