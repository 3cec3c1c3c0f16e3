#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>

#include "okml/mkl.hpp"
#include "okml/norma.hpp"
#include "okml/stream.hpp"

namespace okml {

enum class DataSourceKind { Ar1, Csv };

/// Every knob of one experiment. Defaults reproduce the published setup:
/// 20 Gaussian widths in [0.1, 10], NORMA with lr 0.05, eta 0.01, budget 100,
/// window 10, OMKR rate 8e-4 halved every 50 steps down to 1e-5, and an
/// AR(1) stream with phi 0.5488135 over 500 steps.
struct RunConfig {
  std::size_t kernel_count = 20;
  double min_width = 0.1;
  double max_width = 10.0;

  NormaConfig norma;
  OmkrSchedule omkr;
  RegGradient reg_gradient = RegGradient::AsWritten;

  DataSourceKind source = DataSourceKind::Ar1;
  Ar1Config ar1;
  std::filesystem::path csv_path;
  std::string x_column = "x";
  std::string y_column = "y";

  /// Number of protocol steps N. For CSV input 0 means every row.
  std::size_t steps = 500;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "okml_out";
  /// 0 disables the snapshot.
  std::size_t snapshot_step = 42;
  double snapshot_resolution = 0.25;

  double qp_delta = kDefaultQpDelta;
  /// 0 selects one worker per hardware thread.
  std::size_t workers = 1;

  CostParams cost() const { return CostParams{norma.regularizer, Loss::squared()}; }

  /// Checks every constraint and throws one ConfigError listing all
  /// violations.
  void validate() const;
};

using ConfigValue = std::variant<bool, std::int64_t, double, std::string>;
using ConfigTable = std::map<std::string, std::map<std::string, ConfigValue>>;

/// Parses a TOML document whose top level holds only `[section]` tables of
/// numbers, booleans and strings. Throws ConfigError with the offending line.
ConfigTable parse_config_text(const std::string& text);

/// Applies a parsed table over the defaults. Unknown sections or keys and
/// type mismatches are collected and reported together.
RunConfig config_from_table(const ConfigTable& table);

/// Reads, parses and validates a config file. Throws IoError("config not
/// found") if the file does not exist.
RunConfig load_config(const std::filesystem::path& path);

}  // namespace okml
