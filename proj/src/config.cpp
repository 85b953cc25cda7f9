#include "nijtoep/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "nijtoep/errors.hpp"

namespace nijtoep {

namespace {

[[noreturn]] void fail(int line, const std::string& message) {
  throw Error(ErrorKind::Config, "line " + std::to_string(line) + ": " + message);
}

std::string_view trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Strips a trailing comment that is not inside a quoted string.
std::string_view strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

TomlValue parse_value(std::string_view raw, int line) {
  TomlValue v;
  v.line = line;
  raw = trim(raw);
  if (raw.empty()) fail(line, "missing value");
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"') fail(line, "unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
      if (raw[i] == '\\' && i + 2 < raw.size() && (raw[i + 1] == '"' || raw[i + 1] == '\\')) {
        out += raw[i + 1];
        ++i;
      } else {
        out += raw[i];
      }
    }
    v.kind = TomlValue::Kind::String;
    v.text = std::move(out);
    return v;
  }
  if (raw == "true" || raw == "false") {
    v.kind = TomlValue::Kind::Boolean;
    v.boolean = raw == "true";
    return v;
  }
  const std::string token(raw);
  bool integral = !token.empty();
  for (std::size_t i = 0; i < token.size(); ++i) {
    const char c = token[i];
    if (i == 0 && (c == '+' || c == '-')) continue;
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      integral = false;
      break;
    }
  }
  char* end = nullptr;
  if (integral) {
    v.kind = TomlValue::Kind::Integer;
    v.integer = std::strtoll(token.c_str(), &end, 10);
    v.number = static_cast<double>(v.integer);
    if (end != token.c_str() + token.size()) fail(line, "malformed integer '" + token + "'");
    return v;
  }
  v.kind = TomlValue::Kind::Float;
  v.number = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size()) fail(line, "malformed value '" + token + "'");
  return v;
}

}  // namespace

double TomlValue::as_number(const std::string& context) const {
  if (kind == Kind::Float || kind == Kind::Integer) return number;
  fail(line, context + ": expected a number");
}

std::int64_t TomlValue::as_integer(const std::string& context) const {
  if (kind == Kind::Integer) return integer;
  fail(line, context + ": expected an integer");
}

const std::string& TomlValue::as_string(const std::string& context) const {
  if (kind == Kind::String) return text;
  fail(line, context + ": expected a quoted string");
}

const TomlValue* TomlSection::find(std::string_view key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) return &v;
  }
  return nullptr;
}

const TomlSection* TomlDoc::find(std::string_view name) const {
  for (const auto& s : sections) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

TomlDoc parse_toml(std::string_view text) {
  TomlDoc doc;
  TomlSection* current = nullptr;
  std::istringstream stream{std::string(text)};
  std::string raw_line;
  int line_no = 0;
  while (std::getline(stream, raw_line)) {
    ++line_no;
    std::string_view line = trim(strip_comment(raw_line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated section header");
      std::string name{trim(line.substr(1, line.size() - 2))};
      if (name.empty()) fail(line_no, "empty section name");
      if (doc.find(name)) fail(line_no, "duplicate section [" + name + "]");
      doc.sections.push_back({std::move(name), line_no, {}});
      current = &doc.sections.back();
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected key = value");
    std::string key{trim(line.substr(0, eq))};
    if (key.empty()) fail(line_no, "empty key");
    if (!current) fail(line_no, "key '" + key + "' outside any section");
    if (current->find(key)) fail(line_no, "duplicate key '" + key + "'");
    current->entries.emplace_back(std::move(key), parse_value(line.substr(eq + 1), line_no));
  }
  return doc;
}

TomlDoc load_toml_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Config, "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_toml(buf.str());
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, path + ": " + e.what());
  }
}

}  // namespace nijtoep
