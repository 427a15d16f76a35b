#include "flock/config.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace flock {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string stripped = trim(line.substr(0, line.find('#')));
    if (stripped.empty()) continue;
    size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: " + path + ":" + std::to_string(line_no) +
                               ": expected key = value");
    std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error("config: " + path + ":" + std::to_string(line_no) +
                               ": empty key");
    values_[key] = value;
  }
}

void RunConfig::set(const std::string& key, const std::string& value) { values_[key] = value; }

void RunConfig::set_override(const std::string& assignment) {
  size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    throw std::runtime_error("config: override '" + assignment + "' is not key=value");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::string RunConfig::get_string(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

long RunConfig::get_long(const std::string& key, long fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    size_t pos = 0;
    long v = std::stol(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config: key '" + key + "' is not an integer: " + it->second);
  }
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config: key '" + key + "' is not a number: " + it->second);
  }
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::string v = it->second;
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw std::runtime_error("config: key '" + key + "' is not a boolean: " + it->second);
}

void RunConfig::require_known_keys(const std::set<std::string>& allowed) const {
  std::string unknown;
  for (const auto& [key, value] : values_)
    if (!allowed.count(key)) unknown += unknown.empty() ? key : ", " + key;
  if (!unknown.empty()) throw std::runtime_error("config: unknown keys: " + unknown);
}

}  // namespace flock
