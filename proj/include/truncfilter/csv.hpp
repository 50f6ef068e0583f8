#ifndef TRUNCFILTER_CSV_HPP
#define TRUNCFILTER_CSV_HPP

#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <ostream>
#include <string>

namespace truncfilter::csv {

/// 17 significant digits, so every double round-trips; nan/inf spelled out.
inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string num(int v) { return std::to_string(v); }
inline std::string num(bool v) { return v ? "1" : "0"; }

inline void row(std::ostream& os, std::initializer_list<std::string> cells) {
  bool first = true;
  for (const auto& c : cells) {
    if (!first) os << ',';
    os << c;
    first = false;
  }
  os << '\n';
}

}  // namespace truncfilter::csv

#endif
