#pragma once

#include <map>
#include <set>
#include <string>

namespace flock {

// Flat "key = value" configuration with '#' comments. Later assignments
// win, so command-line overrides are applied by inserting after the file.
class RunConfig {
 public:
  void load_file(const std::string& path);
  void set(const std::string& key, const std::string& value);
  // "key=value" as passed on the command line
  void set_override(const std::string& assignment);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  long get_long(const std::string& key, long fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  // Throws listing any key outside the allowed set.
  void require_known_keys(const std::set<std::string>& allowed) const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace flock
