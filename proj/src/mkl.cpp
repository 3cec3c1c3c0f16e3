#include "okml/mkl.hpp"

#include <cmath>

#include <fmt/format.h>

#include "okml/errors.hpp"

namespace okml {

namespace {

const NormaConfig& config_for(std::span<const NormaConfig> configs,
                              std::size_t p) {
  return configs.size() == 1 ? configs[0] : configs[p];
}

void check_configs(std::span<const NormaConfig> configs, std::size_t learners) {
  if (configs.size() != 1 && configs.size() != learners)
    throw ConfigError(fmt::format(
        "expected 1 or {} NORMA configs, got {}", learners, configs.size()));
}

void check_step(std::int64_t state_step, const SlidingWindow& window) {
  if (window.newest_index() != state_step)
    throw ProtocolError(fmt::format(
        "state holds step {} but the window ends at sample {}", state_step,
        window.newest_index()));
}

}  // namespace

void CostParams::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta))
    throw ConfigError("cost regularizer eta must be positive");
}

std::vector<Expansion> make_learners(const Dictionary& dictionary,
                                     std::size_t budget) {
  std::vector<Expansion> learners;
  learners.reserve(dictionary.size());
  for (const KernelSpec& k : dictionary.kernels()) learners.emplace_back(k, budget);
  return learners;
}

void advance_learners(std::vector<Expansion>& learners,
                      std::span<const NormaConfig> configs,
                      const SlidingWindow& window, const Loss& loss,
                      WorkerPool& pool) {
  check_configs(configs, learners.size());
  pool.parallel_for(learners.size(), [&](std::size_t p) {
    norma_update(learners[p], config_for(configs, p), window, loss);
  });
}

WindowPredictions predict_window(const std::vector<Expansion>& learners,
                                 const SlidingWindow& window,
                                 WorkerPool& pool) {
  WindowPredictions out(learners.size());
  pool.parallel_for(learners.size(), [&](std::size_t p) {
    auto& row = out[p];
    row.reserve(window.size());
    for (const Sample& s : window) row.push_back(learners[p](s.x));
  });
  return out;
}

QpInstance assemble_qp(const std::vector<Expansion>& learners,
                       const WindowPredictions& predictions,
                       const CostParams& cost, const SlidingWindow& window,
                       double delta) {
  const std::size_t P = learners.size();
  std::vector<double> a(P), b(P);
  for (std::size_t p = 0; p < P; ++p) {
    a[p] = 0.5 * cost.eta * learners[p].norm_sq();
    double loss_sum = 0.0;
    for (std::size_t i = 0; i < window.size(); ++i)
      loss_sum += cost.loss.value(predictions[p][i], window[i].y);
    b[p] = loss_sum;
  }
  return QpInstance(std::move(a), std::move(b), delta);
}

QpInstance assemble_qp(const std::vector<Expansion>& learners,
                       const CostParams& cost, const SlidingWindow& window,
                       double delta) {
  WorkerPool serial(1);
  return assemble_qp(learners, predict_window(learners, window, serial), cost,
                     window, delta);
}

double combine(std::span<const double> weights,
               const std::vector<Expansion>& learners, double x) {
  double value = 0.0;
  for (std::size_t p = 0; p < learners.size(); ++p)
    value += weights[p] * learners[p](x);
  return value;
}

double combined_norm_sq(std::span<const double> weights,
                        const std::vector<Expansion>& learners) {
  double total = 0.0;
  for (std::size_t p = 0; p < learners.size(); ++p)
    total += weights[p] * weights[p] * learners[p].norm_sq();
  return total;
}

double upper_bound_cost(const SimplexWeights& theta,
                        const std::vector<Expansion>& learners,
                        const CostParams& cost, const SlidingWindow& window) {
  double total = 0.0;
  for (std::size_t p = 0; p < learners.size(); ++p) {
    double losses = 0.0;
    for (const Sample& s : window) losses += cost.loss.value(learners[p](s.x), s.y);
    total += theta[p] * losses +
             theta[p] * theta[p] * 0.5 * cost.eta * learners[p].norm_sq();
  }
  return total;
}

SchemeState SchemeState::initial(const Dictionary& dictionary,
                                 std::size_t budget) {
  return SchemeState{make_learners(dictionary, budget),
                     SimplexWeights::uniform(dictionary.size()), 1};
}

double predict(const SchemeState& state, double x) {
  return combine(state.theta.values(), state.learners, x);
}

SchemeState scheme_step(const SchemeState& state,
                        std::span<const NormaConfig> configs,
                        const CostParams& cost, const SlidingWindow& window,
                        WorkerPool& pool, double delta) {
  if (window.empty()) {
    SchemeState out = state;
    out.theta = SimplexWeights::uniform(state.learners.size());
    return out;
  }
  check_step(state.step, window);

  SchemeState next = state;
  advance_learners(next.learners, configs, window, cost.loss, pool);
  const auto predictions = predict_window(next.learners, window, pool);
  next.theta =
      solve(assemble_qp(next.learners, predictions, cost, window, delta)).theta;
  next.step = state.step + 1;
  return next;
}

double OmkrSchedule::rate(std::int64_t step) const {
  const std::int64_t halvings = std::max<std::int64_t>(step - 1, 0) / halving_period;
  // Past ~1100 halvings the power underflows to zero; the floor takes over.
  const double scaled = std::ldexp(initial, -static_cast<int>(std::min<std::int64_t>(halvings, 4096)));
  return std::max(scaled, floor);
}

void OmkrSchedule::validate() const {
  if (!(initial > 0.0) || !std::isfinite(initial))
    throw ConfigError("omkr.initial_rate must be positive");
  if (halving_period < 1) throw ConfigError("omkr.halving_period must be >= 1");
  if (!(floor >= 0.0) || floor > initial)
    throw ConfigError("omkr.min_rate must lie in [0, initial_rate]");
}

OmkrState OmkrState::initial(const Dictionary& dictionary, std::size_t budget,
                             OmkrSchedule schedule, RegGradient reg) {
  return OmkrState{make_learners(dictionary, budget),
                   std::vector<double>(dictionary.size(), 0.0), 1, schedule,
                   reg};
}

double predict(const OmkrState& state, double x) {
  return combine(state.weights, state.learners, x);
}

std::vector<double> omkr_gradient(std::span<const double> weights,
                                  const std::vector<Expansion>& learners,
                                  const WindowPredictions& predictions,
                                  const CostParams& cost,
                                  const SlidingWindow& window,
                                  RegGradient reg) {
  const std::size_t P = learners.size();
  std::vector<double> gradient(P, 0.0);
  for (std::size_t i = 0; i < window.size(); ++i) {
    double estimate = 0.0;
    for (std::size_t p = 0; p < P; ++p) estimate += weights[p] * predictions[p][i];
    const double slope = cost.loss.derivative(estimate, window[i].y);
    for (std::size_t p = 0; p < P; ++p) gradient[p] += predictions[p][i] * slope;
  }
  const double factor = reg == RegGradient::AsWritten ? cost.eta : 2.0;
  for (std::size_t p = 0; p < P; ++p) {
    const double a = 0.5 * cost.eta * learners[p].norm_sq();
    gradient[p] += factor * a * weights[p];
  }
  return gradient;
}

std::vector<double> omkr_gradient(std::span<const double> weights,
                                  const std::vector<Expansion>& learners,
                                  const CostParams& cost,
                                  const SlidingWindow& window,
                                  RegGradient reg) {
  WorkerPool serial(1);
  return omkr_gradient(weights, learners,
                       predict_window(learners, window, serial), cost, window,
                       reg);
}

OmkrState omkr_step(const OmkrState& state,
                    std::span<const NormaConfig> configs,
                    const CostParams& cost, const SlidingWindow& window,
                    WorkerPool& pool) {
  if (window.empty()) return state;
  check_step(state.step, window);

  OmkrState next = state;
  advance_learners(next.learners, configs, window, cost.loss, pool);
  next.step = state.step + 1;
  const auto predictions = predict_window(next.learners, window, pool);
  const auto gradient = omkr_gradient(state.weights, next.learners, predictions,
                                      cost, window, state.reg_gradient);
  const double rate = state.schedule.rate(next.step);
  for (std::size_t p = 0; p < next.weights.size(); ++p)
    next.weights[p] -= rate * gradient[p];
  return next;
}

}  // namespace okml
