#include "gdm/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "gdm/data.hpp"

namespace gdm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

}  // namespace

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Config Config::parse(const std::string& text) {
  Config cfg;
  cfg.text_ = text;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty section name");
      if (cfg.data_.count(section)) throw ConfigError("line " + std::to_string(line_no) + ": duplicate section [" + section + "]");
      cfg.order_.push_back(section);
      cfg.data_[section];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    if (section.empty()) throw ConfigError("line " + std::to_string(line_no) + ": key outside of any section");
    const std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    // trailing comments need whitespace before the marker
    for (const char* marker : {" #", " ;", "\t#", "\t;"}) {
      const auto c = value.find(marker);
      if (c != std::string::npos) value = trim(value.substr(0, c));
    }
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    auto& entries = cfg.data_[section];
    for (const auto& [k, e] : entries)
      if (k == key)
        throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "' in [" + section +
                          "] (first on line " + std::to_string(e.line) + ")");
    entries.push_back({key, {value, line_no}});
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

bool Config::has_section(const std::string& section) const { return data_.count(section) > 0; }

std::vector<std::string> Config::sections() const { return order_; }

std::vector<std::string> Config::keys(const std::string& section) const {
  std::vector<std::string> out;
  const auto it = data_.find(section);
  if (it == data_.end()) return out;
  for (const auto& [k, e] : it->second) out.push_back(k);
  return out;
}

const Config::Entry* Config::find(const std::string& section, const std::string& key) const {
  const auto it = data_.find(section);
  if (it == data_.end()) return nullptr;
  for (const auto& [k, e] : it->second)
    if (k == key) {
      used_.insert({section, key});
      return &e;
    }
  return nullptr;
}

std::optional<std::string> Config::get(const std::string& section, const std::string& key) const {
  if (const Entry* e = find(section, key)) return e->value;
  return std::nullopt;
}

std::string Config::require(const std::string& section, const std::string& key) const {
  if (const Entry* e = find(section, key)) return e->value;
  throw ConfigError("missing required key '" + key + "' in [" + section + "]");
}

double Config::get_double(const std::string& section, const std::string& key, double fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  double v = 0;
  const auto res = std::from_chars(e->value.data(), e->value.data() + e->value.size(), v);
  if (res.ec != std::errc() || res.ptr != e->value.data() + e->value.size())
    throw ConfigError("line " + std::to_string(e->line) + ": [" + section + "] " + key + " must be a number");
  return v;
}

long long Config::get_int(const std::string& section, const std::string& key, long long fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  long long v = 0;
  const auto res = std::from_chars(e->value.data(), e->value.data() + e->value.size(), v);
  if (res.ec != std::errc() || res.ptr != e->value.data() + e->value.size())
    throw ConfigError("line " + std::to_string(e->line) + ": [" + section + "] " + key + " must be an integer");
  return v;
}

std::vector<std::string> Config::get_list(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  return e ? split_list(e->value) : std::vector<std::string>{};
}

std::vector<double> Config::get_doubles(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  std::vector<double> out;
  if (!e) return out;
  for (const auto& item : split_list(e->value)) {
    double v = 0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (res.ec != std::errc() || res.ptr != item.data() + item.size())
      throw ConfigError("line " + std::to_string(e->line) + ": [" + section + "] " + key + " must be a list of numbers");
    out.push_back(v);
  }
  return out;
}

void Config::reject_unused(const std::set<std::string>& allowed_sections) const {
  for (const auto& section : order_) {
    if (!allowed_sections.count(section)) throw ConfigError("unknown section [" + section + "]");
    for (const auto& [k, e] : data_.at(section))
      if (!used_.count({section, k}))
        throw ConfigError("line " + std::to_string(e.line) + ": unknown key '" + k + "' in [" + section + "]");
  }
}

}  // namespace gdm
