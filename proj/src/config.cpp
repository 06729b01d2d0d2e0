#include "lcsim/config.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace lcsim {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void fail_lookup(const std::string& section, const std::string& key,
                              const char* what) {
  throw std::runtime_error("config: " + std::string(what) + " [" + section + "] " + key);
}

double to_double(const std::string& section, const std::string& key,
                 const std::string& value) {
  const std::string_view v = trim(value);
  double out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    // from_chars does not accept "inf"/"nan" spellings everywhere; keep the
    // config surface strict and explicit instead.
    if (v == "inf") return std::numeric_limits<double>::infinity();
    throw std::runtime_error("config: value '" + value + "' for [" + section + "] " + key +
                             " is not a number");
  }
  return out;
}

}  // namespace

bool ConfigFile::has_section(const std::string& section) const {
  return sections_.count(section) != 0;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  const auto it = sections_.find(section);
  return it != sections_.end() && it->second.count(key) != 0;
}

const std::string& ConfigFile::get(const std::string& section, const std::string& key) const {
  const auto it = sections_.find(section);
  if (it == sections_.end()) fail_lookup(section, key, "missing section for");
  const auto kt = it->second.find(key);
  if (kt == it->second.end()) fail_lookup(section, key, "missing key");
  return kt->second;
}

double ConfigFile::get_double(const std::string& section, const std::string& key) const {
  return to_double(section, key, get(section, key));
}

std::int64_t ConfigFile::get_int(const std::string& section, const std::string& key) const {
  const std::string& raw = get(section, key);
  const std::string_view v = trim(raw);
  std::int64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw std::runtime_error("config: value '" + raw + "' for [" + section + "] " + key +
                             " is not an integer");
  return out;
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key) const {
  const std::string& raw = get(section, key);
  const std::string_view v = trim(raw);
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  throw std::runtime_error("config: value '" + raw + "' for [" + section + "] " + key +
                           " is not a boolean");
}

std::string ConfigFile::get_or(const std::string& section, const std::string& key,
                               std::string fallback) const {
  return has(section, key) ? get(section, key) : std::move(fallback);
}

double ConfigFile::get_double_or(const std::string& section, const std::string& key,
                                 double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

std::int64_t ConfigFile::get_int_or(const std::string& section, const std::string& key,
                                    std::int64_t fallback) const {
  return has(section, key) ? get_int(section, key) : fallback;
}

bool ConfigFile::get_bool_or(const std::string& section, const std::string& key,
                             bool fallback) const {
  return has(section, key) ? get_bool(section, key) : fallback;
}

void ConfigFile::set(const std::string& section, const std::string& key, std::string value) {
  sections_[section][key] = std::move(value);
}

ConfigFile parse_config_text(std::string_view text) {
  ConfigFile cfg;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    const auto comment = line.find_first_of("#;");
    if (comment != std::string_view::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error("config line " + std::to_string(line_no) +
                                 ": unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section.empty())
        throw std::runtime_error("config line " + std::to_string(line_no) +
                                 ": empty section name");
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": expected 'key = value'");
    if (section.empty())
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": key outside any [section]");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty())
      throw std::runtime_error("config line " + std::to_string(line_no) + ": empty key");
    cfg.set(section, key, value);
  }
  return cfg;
}

ConfigFile load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::vector<int> parse_int_list(std::string_view text) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const std::string_view item =
        trim(text.substr(pos, comma == std::string_view::npos ? text.size() - pos : comma - pos));
    if (!item.empty()) {
      int v = 0;
      const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
      if (res.ec != std::errc{} || res.ptr != item.data() + item.size())
        throw std::runtime_error("bad integer list entry '" + std::string(item) + "'");
      out.push_back(v);
    }
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace lcsim
