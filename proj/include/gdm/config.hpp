#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace gdm {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// INI-style run configuration:
//
//   # comment            ; comment
//   [section]
//   key = value
//
// Keys are unique within a section. Lookups mark keys as used so that
// reject_unused() can report every key no consumer recognized.
class Config {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static Config parse(const std::string& text);
  static Config load(const std::filesystem::path& path);

  const std::string& text() const { return text_; }
  bool has_section(const std::string& section) const;
  std::vector<std::string> sections() const;
  // Keys of a section in file order.
  std::vector<std::string> keys(const std::string& section) const;

  std::optional<std::string> get(const std::string& section, const std::string& key) const;
  std::string require(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  long long get_int(const std::string& section, const std::string& key, long long fallback) const;
  std::vector<std::string> get_list(const std::string& section, const std::string& key) const;
  std::vector<double> get_doubles(const std::string& section, const std::string& key) const;

  // Throws ConfigError naming the first section/key that was never read, or
  // any section outside `allowed_sections`.
  void reject_unused(const std::set<std::string>& allowed_sections) const;

 private:
  std::string text_;
  std::vector<std::string> order_;
  std::map<std::string, std::vector<std::pair<std::string, Entry>>> data_;
  mutable std::set<std::pair<std::string, std::string>> used_;

  const Entry* find(const std::string& section, const std::string& key) const;
};

std::vector<std::string> split_list(const std::string& text, char sep = ',');

}  // namespace gdm
