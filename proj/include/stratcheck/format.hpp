#pragma once

#include <charconv>
#include <cstdio>
#include <string>
#include <system_error>

namespace stratcheck {

/// Shortest decimal string that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  }
  return std::string(buf, res.ptr);
}

}  // namespace stratcheck
