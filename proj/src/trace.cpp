#include "fw/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include "fw/common.hpp"

namespace fw {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double RunTrace::best_certified_gap() const {
  double best = kInf;
  for (const auto& r : rows) best = std::min(best, r.gap + r.tolerance);
  return best;
}

void RunTrace::write_csv(std::ostream& os, bool with_timing) const {
  os << kTraceHeader << '\n';
  for (const auto& r : rows) {
    os << r.k << ',' << format_double(r.f) << ',' << format_double(r.gap) << ','
       << format_double(r.alpha) << ',' << r.atom << ',' << r.matvecs << ','
       << (with_timing ? r.millis : 0) << '\n';
  }
}

void RunTrace::write_csv(const std::string& path, bool with_timing) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write trace file: " + path);
  write_csv(out, with_timing);
}

}  // namespace fw
