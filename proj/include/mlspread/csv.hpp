#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

namespace mlspread::csv {

inline std::string fixed(double value, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, value);
  return buf;
}

/// Shortest form that round-trips a probability-like value (e.g. 0.66, 0.028).
inline std::string number(double value) {
  char buf[64];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, value);
    if (std::strtod(buf, nullptr) == value) break;
  }
  return buf;
}

}  // namespace mlspread::csv
