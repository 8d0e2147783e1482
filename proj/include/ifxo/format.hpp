#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <string>
#include <system_error>

namespace ifxo {

// Shortest round-trip decimal representation of a double. Locale-free and
// deterministic, so file outputs are byte-stable across runs.
inline std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  return std::string(buf, ptr);
}

// Strict double parse: the whole token must be consumed.
inline bool parse_double(const std::string& token, double& out) {
  if (token.empty()) return false;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace ifxo
