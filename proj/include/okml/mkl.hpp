#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "okml/fork_join.hpp"
#include "okml/kernel.hpp"
#include "okml/norma.hpp"
#include "okml/simplex_qp.hpp"
#include "okml/stream.hpp"

namespace okml {

/// Regularized window cost: sum of losses plus (eta / 2) ||f||^2.
struct CostParams {
  double eta = 0.01;
  Loss loss = Loss::squared();

  void validate() const;
};

/// predictions[p][i] = f_p(x_i) for the i-th (oldest first) window sample.
using WindowPredictions = std::vector<std::vector<double>>;

/// Builds one empty expansion per dictionary entry.
std::vector<Expansion> make_learners(const Dictionary& dictionary,
                                     std::size_t budget);

/// Advances every learner by one NORMA step, one learner per pool index.
/// `configs` holds either one shared config or one per learner.
void advance_learners(std::vector<Expansion>& learners,
                      std::span<const NormaConfig> configs,
                      const SlidingWindow& window, const Loss& loss,
                      WorkerPool& pool);

WindowPredictions predict_window(const std::vector<Expansion>& learners,
                                 const SlidingWindow& window, WorkerPool& pool);

/// a_p = (eta/2) ||f_p||^2 and b_p = sum over the window of the loss of f_p.
QpInstance assemble_qp(const std::vector<Expansion>& learners,
                       const CostParams& cost, const SlidingWindow& window,
                       double delta = kDefaultQpDelta);
QpInstance assemble_qp(const std::vector<Expansion>& learners,
                       const WindowPredictions& predictions,
                       const CostParams& cost, const SlidingWindow& window,
                       double delta = kDefaultQpDelta);

/// sum_p weights_p f_p(x), accumulated in ascending p.
double combine(std::span<const double> weights,
               const std::vector<Expansion>& learners, double x);

/// sum_p weights_p^2 ||f_p||^2: squared direct-sum norm of the combination.
double combined_norm_sq(std::span<const double> weights,
                        const std::vector<Expansion>& learners);

/// Window cost of an arbitrary predictor given the squared norm to charge.
template <class Estimate>
double incurred_cost(const Estimate& estimate, const CostParams& cost,
                     const SlidingWindow& window, double norm_sq_value) {
  double total = 0.0;
  for (const Sample& s : window) total += cost.loss.value(estimate(s.x), s.y);
  return total + 0.5 * cost.eta * norm_sq_value;
}

/// Separable surrogate sum_i sum_p theta_p l(f_p(x_i), y_i) +
/// theta_p^2 (eta/2) ||f_p||^2, which dominates the cost of theta^T f.
double upper_bound_cost(const SimplexWeights& theta,
                        const std::vector<Expansion>& learners,
                        const CostParams& cost, const SlidingWindow& window);

struct SchemeState {
  std::vector<Expansion> learners;
  SimplexWeights theta;
  /// n: the state holds f^(n) and theta^(n).
  std::int64_t step = 1;

  /// Zero learners and uniform weights at n = 1.
  static SchemeState initial(const Dictionary& dictionary, std::size_t budget);
};

double predict(const SchemeState& state, double x);

/// One iteration of the convex-combination scheme: advance every learner,
/// then pick theta by solving the simplex QP on the same window. With an
/// empty window the state is returned with uniform weights.
SchemeState scheme_step(const SchemeState& state,
                        std::span<const NormaConfig> configs,
                        const CostParams& cost, const SlidingWindow& window,
                        WorkerPool& pool, double delta = kDefaultQpDelta);

struct OmkrSchedule {
  double initial = 8e-4;
  std::int64_t halving_period = 50;
  double floor = 1e-5;

  /// max(initial * 2^-floor((n-1)/period), floor).
  double rate(std::int64_t step) const;
  void validate() const;
};

/// Regularizer gradient used by the OMKR weight update.
/// AsWritten: eta * A w. Derived: 2 A w, the exact gradient of
/// (eta/2) sum_p w_p^2 ||f_p||^2 (A = diag((eta/2) ||f_p||^2)).
enum class RegGradient { AsWritten, Derived };

struct OmkrState {
  std::vector<Expansion> learners;
  std::vector<double> weights;
  std::int64_t step = 1;
  OmkrSchedule schedule;
  RegGradient reg_gradient = RegGradient::AsWritten;

  static OmkrState initial(const Dictionary& dictionary, std::size_t budget,
                           OmkrSchedule schedule = {},
                           RegGradient reg = RegGradient::AsWritten);
};

double predict(const OmkrState& state, double x);

/// Gradient in w of the window cost of w^T f, loss part evaluated at
/// `weights`.
std::vector<double> omkr_gradient(std::span<const double> weights,
                                  const std::vector<Expansion>& learners,
                                  const WindowPredictions& predictions,
                                  const CostParams& cost,
                                  const SlidingWindow& window,
                                  RegGradient reg);
std::vector<double> omkr_gradient(std::span<const double> weights,
                                  const std::vector<Expansion>& learners,
                                  const CostParams& cost,
                                  const SlidingWindow& window,
                                  RegGradient reg);

/// One OMKR iteration: advance learners, then a gradient step on w with
/// rate schedule.rate(n) for the new step n.
OmkrState omkr_step(const OmkrState& state,
                    std::span<const NormaConfig> configs,
                    const CostParams& cost, const SlidingWindow& window,
                    WorkerPool& pool);

}  // namespace okml
