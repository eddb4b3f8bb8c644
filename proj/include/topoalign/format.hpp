#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

namespace topoalign {

// Decimal text with 9 significant digits (round-trips any f32 exactly).
inline std::string format_sig9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

// Value as it reads back after a 9-significant-digit write.
inline double round_sig9(double v) {
  if (!std::isfinite(v) || v == 0.0) return v;
  return std::strtod(format_sig9(v).c_str(), nullptr);
}

}  // namespace topoalign
