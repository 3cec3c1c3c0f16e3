#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "okml/config.hpp"
#include "okml/stream.hpp"

namespace okml {

/// Costs charged at one protocol step n, after f^(n) was fixed and S_L^(n)
/// revealed.
struct StepCosts {
  std::int64_t step = 0;
  double scheme_inst = 0.0;
  double scheme_cum = 0.0;
  double omkr_inst = 0.0;
  double omkr_cum = 0.0;
  std::vector<double> single_inst;
  std::vector<double> single_cum;
  /// theta^(n) and w^(n), the weights behind the charged estimates.
  std::vector<double> theta;
  std::vector<double> weights;
};

/// Grid evaluation of the estimates in force at one step.
struct Snapshot {
  std::int64_t step = 0;
  /// 0-based learner positions with the lowest / highest cumulative cost so
  /// far.
  std::size_t best = 0;
  std::size_t worst = 0;
  std::vector<double> grid;
  std::vector<double> scheme;
  std::vector<double> omkr;
  std::vector<double> best_single;
  std::vector<double> worst_single;
  std::vector<Sample> observed;
};

struct RunRecord {
  std::size_t window_length = 0;
  std::vector<double> widths;
  std::vector<StepCosts> steps;
  std::optional<Snapshot> snapshot;

  std::size_t kernel_count() const noexcept { return widths.size(); }
};

/// Error raised inside a run, tagged with the step and competitor.
class RunError : public std::runtime_error {
 public:
  RunError(std::int64_t step, const std::string& competitor,
           const std::string& what);
  std::int64_t step() const noexcept { return step_; }
  const std::string& competitor() const noexcept { return competitor_; }

 private:
  std::int64_t step_;
  std::string competitor_;
};

/// Called once per step with n, right after every competitor's f^(n) is
/// fixed and before sample n is requested from the source.
using ProtocolObserver = std::function<void(std::int64_t)>;

/// Runs the online protocol on the configured data source.
RunRecord run_experiment(const RunConfig& cfg);

/// Runs the online protocol for cfg.steps steps (all available samples when
/// 0) pulling from `source`. Every step: fix estimates, reveal sample n,
/// charge C(f^(n); S_L^(n)) to every competitor, then update all learners
/// once and both combiners from the shared learner bank.
RunRecord run_experiment(const RunConfig& cfg, SampleSource& source,
                         const ProtocolObserver& observer = {});

}  // namespace okml
