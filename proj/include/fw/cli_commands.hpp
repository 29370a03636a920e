#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace fw::cli {

enum ExitCode : int { kOk = 0, kUncertified = 1, kConfigError = 2, kDataError = 3 };

/// `solve`: one run described by a JSON config. Writes the trace CSV and a
/// JSON summary to the configured paths. Certified (eps given and reached)
/// or budget-only runs exit 0; eps given but not reached exits 1.
int cmd_solve(const nlohmann::json& config, std::ostream& out);

struct CompleteArgs {
  std::string data;
  std::string format = "tab_100k";
  double t = 9975.0;
  int steps = 15;
  bool line_search = true;
  bool grad_avg = false;
  /// "0.5" (random fraction) or "holdout:10" (ratings per user).
  std::string split = "0.5";
  /// "asis" (ratings used unchanged) or "means" (mean-offset normalization).
  std::string preset = "asis";
  bool accuracy_driven = false;  ///< eigensolver accuracy instead of the power budget
  std::uint64_t seed = 0;
  std::string trace_path;
  std::string metrics_path;
  bool timing = false;  ///< include millis in the CSV
};

/// `complete`: matrix completion on a ratings file. --steps 0 reports the
/// predictions of the offsets alone.
int cmd_complete(const CompleteArgs& args, std::ostream& out);

struct SdpfeasArgs {
  std::string problem;
  double eps = 0.05;
  std::optional<int> max_iters;
  std::uint64_t seed = 0;
  std::string trace_path;
  std::string summary_path;
  bool timing = false;
};

/// `sdpfeas`: eps-feasibility, or a maximization by binary search when the
/// problem file has an objective block. Exit 0 when feasibility or
/// infeasibility is certified, 1 when the budget ran out first.
int cmd_sdpfeas(const SdpfeasArgs& args, std::ostream& out);

/// `bench`: sweeps from a JSON config, one CSV row per point.
///   {"kind": "t_sweep", "data": ..., "t": [..], "steps": 15, ...}
///   {"kind": "k_sweep", "n": [5, 50], "max_iters": 100}
int cmd_bench(const nlohmann::json& config, const std::string& csv_path, std::ostream& out);

/// Parses argv with the subcommands above; returns the exit code.
int run_cli(int argc, char** argv);

}  // namespace fw::cli
