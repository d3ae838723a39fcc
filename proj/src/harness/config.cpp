#include "regbank/harness/config.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "regbank/common.hpp"

namespace regbank::harness {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

Config Config::from_text(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos || trim(t.substr(0, eq)).empty())
      throw Error(ErrorCode::ParseError, "config line " + std::to_string(line_no) + ": expected key=value");
    cfg.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return cfg;
}

Config Config::from_file(const std::string& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::MissingFile, "no such config: " + path);
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str());
}

void Config::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw Error(ErrorCode::InvalidArgument, "override must be key=value: " + assignment);
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void Config::apply_environment() {
  if (const char* seed = std::getenv("REGBANK_SEED"); seed && *seed) set("seed", seed);
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw Error(ErrorCode::ParseError, "config key " + key + ": cannot parse '" + text + "'");
  return value;
}

}  // namespace

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? parse_number<double>(key, values_.at(key)) : fallback;
}

int Config::get_int(const std::string& key, int fallback) const {
  return has(key) ? parse_number<int>(key, values_.at(key)) : fallback;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  return has(key) ? parse_number<std::uint64_t>(key, values_.at(key)) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = values_.at(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorCode::ParseError, "config key " + key + ": expected a boolean, got '" + v + "'");
}

std::vector<double> Config::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
  if (!has(key)) return fallback;
  std::vector<double> out;
  for (const auto& part : split(values_.at(key), ',')) out.push_back(parse_number<double>(key, trim(part)));
  return out;
}

std::vector<std::string> Config::get_strings(const std::string& key, const std::vector<std::string>& fallback) const {
  if (!has(key)) return fallback;
  std::vector<std::string> out;
  for (const auto& part : split(values_.at(key), ','))
    if (!trim(part).empty()) out.push_back(trim(part));
  return out;
}

std::string Config::dump() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

}  // namespace regbank::harness
