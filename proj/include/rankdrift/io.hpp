#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <string>

#include "rankdrift/errors.hpp"

namespace rankdrift {

// Shortest round-trip decimal form, '.' decimal point, no locale.
inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// RFC 4180 field quoting: only when the field contains a comma, quote, or
// line break.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline void write_text_file(const std::string& path,
                            const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  out << content;
  if (!out) throw Error("write failed: " + path);
}

}  // namespace rankdrift
