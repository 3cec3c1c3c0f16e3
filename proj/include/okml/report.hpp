#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "okml/experiment.hpp"

namespace okml {

/// Writes costs.csv, weights.csv and, when the record holds one,
/// snapshot_<n>.csv into `dir` (created if missing). Reals use the shortest
/// round-trip representation, so equal records give identical bytes.
/// Returns the written paths.
std::vector<std::filesystem::path> emit_csv(const RunRecord& record,
                                            const std::filesystem::path& dir);

/// Writes cumulative_cost.svg and snapshot_<n>.svg line charts. Throws
/// InputError for an empty record without touching the filesystem.
std::vector<std::filesystem::path> emit_plot(const RunRecord& record,
                                             const std::filesystem::path& dir);

/// Final cumulative costs read back from one run directory's costs.csv.
struct RunSummary {
  std::string name;
  std::size_t steps = 0;
  double scheme = 0.0;
  double omkr = 0.0;
  /// 1-based learner numbers.
  std::size_t best_single = 0;
  double best_single_cost = 0.0;
  std::size_t worst_single = 0;
  double worst_single_cost = 0.0;
};

RunSummary summarize_run(const std::filesystem::path& dir);

/// One CSV table with a row per run plus a closing median row.
std::string compare_runs(const std::vector<std::filesystem::path>& dirs);

}  // namespace okml
