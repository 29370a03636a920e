#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fw {

struct TraceRow {
  int k = 0;
  double f = 0.0;
  double gap = 0.0;        ///< measured <x - s, grad> at iterate k
  double tolerance = 0.0;  ///< additive LMO slack behind `gap` (inf if unknown)
  double alpha = 0.0;      ///< step taken from iterate k (0 on the final row)
  std::string atom;
  std::size_t matvecs = 0;  ///< cumulative
  long long millis = 0;     ///< cumulative wall time
};

/// Per-iteration record of a run. Serialized as CSV with header
/// `k,f,gap,alpha,atom,matvecs,millis`; tolerance and seed stay in memory.
struct RunTrace {
  std::vector<TraceRow> rows;
  std::optional<std::uint64_t> seed;

  bool empty() const { return rows.empty(); }
  const TraceRow& back() const { return rows.back(); }

  /// Smallest gap + tolerance over all rows (inf when empty).
  double best_certified_gap() const;

  void write_csv(std::ostream& os, bool with_timing = true) const;
  void write_csv(const std::string& path, bool with_timing = true) const;
};

inline constexpr const char* kTraceHeader = "k,f,gap,alpha,atom,matvecs,millis";

/// Shortest round-trippable decimal form, used in all CSV/JSON outputs.
std::string format_double(double v);

}  // namespace fw
