#pragma once

// Minimal INI-style configuration reader shared by device-parameter files
// and experiment configs.  Format: `[section]` headers, `key = value` pairs,
// `#` or `;` comments, blank lines ignored.  Parse errors carry the line
// number; lookup errors name the section and key.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace lcsim {

class ConfigFile {
 public:
  using Section = std::map<std::string, std::string>;

  bool has_section(const std::string& section) const;
  bool has(const std::string& section, const std::string& key) const;

  // Throw std::runtime_error naming the missing section/key.
  const std::string& get(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key) const;
  std::int64_t get_int(const std::string& section, const std::string& key) const;
  bool get_bool(const std::string& section, const std::string& key) const;

  // Defaulted variants.
  std::string get_or(const std::string& section, const std::string& key,
                     std::string fallback) const;
  double get_double_or(const std::string& section, const std::string& key,
                       double fallback) const;
  std::int64_t get_int_or(const std::string& section, const std::string& key,
                          std::int64_t fallback) const;
  bool get_bool_or(const std::string& section, const std::string& key, bool fallback) const;

  void set(const std::string& section, const std::string& key, std::string value);

  const std::map<std::string, Section>& sections() const { return sections_; }

 private:
  std::map<std::string, Section> sections_;
};

ConfigFile parse_config_text(std::string_view text);
ConfigFile load_config(const std::string& path);

// "1,2,3" -> {1, 2, 3}; throws std::runtime_error on malformed entries.
std::vector<int> parse_int_list(std::string_view text);

}  // namespace lcsim
