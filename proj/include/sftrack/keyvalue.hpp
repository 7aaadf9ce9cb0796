#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "sftrack/error.hpp"

namespace sftrack::kv {

/// One `key = value` line. `section` is empty for keys before the first
/// `[section]` header; `section_index` counts headers seen so far (so
/// repeated sections stay distinguishable).
struct Entry {
  std::string section;
  int section_index = -1;
  std::string key;
  std::string value;
  std::size_t line = 0;
};

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

/// Flat key-value text: `key = value` per line, `#` starts a comment,
/// `[name]` opens a section.
inline std::vector<Entry> parse(std::string_view text, const std::string& source = {}) {
  std::vector<Entry> out;
  std::string section;
  int section_index = -1;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) {
      if (eol == text.size()) break;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3)
        throw ParseError(source, line_no, "malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      ++section_index;
    } else {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ParseError(source, line_no, "expected 'key = value'");
      std::string key(trim(line.substr(0, eq)));
      if (key.empty()) throw ParseError(source, line_no, "empty key");
      out.push_back({section, section_index, std::move(key), std::string(trim(line.substr(eq + 1))),
                     line_no});
    }
    if (eol == text.size()) break;
  }
  return out;
}

inline double to_double(const Entry& e, const std::string& source = {}) {
  double v = 0.0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  if (!e.value.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    throw ParseError(source, e.line, "key '" + e.key + "': expected a number, got '" + e.value + "'");
  return v;
}

inline long long to_int(const Entry& e, const std::string& source = {}) {
  long long v = 0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    throw ParseError(source, e.line, "key '" + e.key + "': expected an integer, got '" + e.value + "'");
  return v;
}

inline std::uint64_t to_uint64(const Entry& e, const std::string& source = {}) {
  std::uint64_t v = 0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    throw ParseError(source, e.line,
                     "key '" + e.key + "': expected an unsigned integer, got '" + e.value + "'");
  return v;
}

inline bool to_bool(const Entry& e, const std::string& source = {}) {
  if (e.value == "true" || e.value == "1") return true;
  if (e.value == "false" || e.value == "0") return false;
  throw ParseError(source, e.line, "key '" + e.key + "': expected true/false, got '" + e.value + "'");
}

/// Shortest round-trip decimal representation.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline std::string format_bool(bool b) { return b ? "true" : "false"; }

}  // namespace sftrack::kv
