#pragma once
// Flat `key = value` configuration text. Lines starting with `#` are
// comments. List values use brackets: `linker.weights = [1, 1, -1, 1, 1]`.

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace kbqa {

class Config {
 public:
  Config() = default;
  static Config load_file(const std::string& path);
  static Config from_string(const std::string& text, const std::string& name = "<config>");

  std::optional<std::string> get(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::string> get_list(const std::string& key) const;       // empty if absent
  std::vector<double> get_double_list(const std::string& key) const;

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace kbqa
