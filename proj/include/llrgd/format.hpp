#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <system_error>

namespace llrgd {

/// Shortest decimal text that round-trips to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return res.ec == std::errc() ? std::string(buf, res.ptr) : std::to_string(v);
}

}  // namespace llrgd
