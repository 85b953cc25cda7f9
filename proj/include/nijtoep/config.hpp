#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "nijtoep/errors.hpp"

namespace nijtoep {

// Minimal TOML subset: [section] headers and scalar key = value entries
// (strings, numbers, booleans). Keys keep declaration order so reports are
// reproducible byte for byte.
struct TomlValue {
  enum class Kind { String, Float, Integer, Boolean };
  Kind kind = Kind::String;
  std::string text;
  double number = 0.0;
  std::int64_t integer = 0;
  bool boolean = false;
  int line = 0;

  double as_number(const std::string& context) const;
  std::int64_t as_integer(const std::string& context) const;
  const std::string& as_string(const std::string& context) const;
};

struct TomlSection {
  std::string name;
  int line = 0;
  std::vector<std::pair<std::string, TomlValue>> entries;

  const TomlValue* find(std::string_view key) const;
};

struct TomlDoc {
  std::vector<TomlSection> sections;

  const TomlSection* find(std::string_view name) const;
};

TomlDoc parse_toml(std::string_view text);
TomlDoc load_toml_file(const std::string& path);

}  // namespace nijtoep
