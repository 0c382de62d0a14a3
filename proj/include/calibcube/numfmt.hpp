#ifndef CALIBCUBE_NUMFMT_HPP
#define CALIBCUBE_NUMFMT_HPP

#include <charconv>
#include <string>

namespace calibcube {

/// Shortest round-trip decimal form, locale-independent. All text output
/// (TOML, SVG) goes through here so identical inputs yield identical bytes.
inline std::string fmt_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, ptr);
  // Keep a float marker so TOML readers do not reparse the value as integer.
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
      s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
    s += ".0";
  return s;
}

/// Fixed-precision form for coordinate-heavy output like SVG paths.
inline std::string fmt_double_fixed(double v, int precision) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v,
                                 std::chars_format::fixed, precision);
  return std::string(buf, ptr);
}

}  // namespace calibcube

#endif  // CALIBCUBE_NUMFMT_HPP
