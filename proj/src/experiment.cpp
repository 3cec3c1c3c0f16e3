#include "okml/experiment.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "okml/errors.hpp"
#include "okml/fork_join.hpp"
#include "okml/mkl.hpp"

namespace okml {

RunError::RunError(std::int64_t step, const std::string& competitor,
                   const std::string& what)
    : std::runtime_error(fmt::format("step {}, {}: {}", step, competitor, what)),
      step_(step),
      competitor_(competitor) {}

RunRecord run_experiment(const RunConfig& cfg) {
  cfg.validate();
  std::vector<Sample> samples;
  if (cfg.source == DataSourceKind::Ar1) {
    Ar1Config ar1 = cfg.ar1;
    ar1.seed = cfg.seed;
    samples = ar1_stream(ar1, cfg.steps);
  } else {
    samples = csv_ingest(cfg.csv_path, cfg.x_column, cfg.y_column);
    if (cfg.steps > samples.size())
      throw ConfigError(fmt::format("run.steps = {} but {} holds only {} samples",
                                    cfg.steps, cfg.csv_path.string(),
                                    samples.size()));
  }
  VectorSource source(std::move(samples));
  return run_experiment(cfg, source);
}

namespace {

double window_cost(const SlidingWindow& window, const CostParams& cost,
                   const std::vector<double>& estimates, double norm_sq_value) {
  double total = 0.0;
  for (std::size_t i = 0; i < window.size(); ++i)
    total += cost.loss.value(estimates[i], window[i].y);
  return total + 0.5 * cost.eta * norm_sq_value;
}

std::vector<double> combined_estimates(std::span<const double> weights,
                                       const WindowPredictions& predictions,
                                       std::size_t count) {
  std::vector<double> out(count, 0.0);
  for (std::size_t i = 0; i < count; ++i) {
    double value = 0.0;
    for (std::size_t p = 0; p < predictions.size(); ++p)
      value += weights[p] * predictions[p][i];
    out[i] = value;
  }
  return out;
}

Snapshot take_snapshot(std::int64_t step, const std::vector<Sample>& observed,
                       double resolution, const std::vector<Expansion>& learners,
                       std::span<const double> theta,
                       std::span<const double> weights,
                       const std::vector<double>& single_cum) {
  Snapshot snap;
  snap.step = step;
  snap.observed = observed;
  const auto [lo, hi] = std::minmax_element(single_cum.begin(), single_cum.end());
  snap.best = static_cast<std::size_t>(lo - single_cum.begin());
  snap.worst = static_cast<std::size_t>(hi - single_cum.begin());

  const double first = observed.front().x;
  const double last = observed.back().x;
  const auto points =
      static_cast<std::size_t>(std::floor((last - first) / resolution + 1e-9)) + 1;
  for (std::size_t k = 0; k < points; ++k) {
    const double x = first + double(k) * resolution;
    snap.grid.push_back(x);
    snap.scheme.push_back(combine(theta, learners, x));
    snap.omkr.push_back(combine(weights, learners, x));
    snap.best_single.push_back(learners[snap.best](x));
    snap.worst_single.push_back(learners[snap.worst](x));
  }
  return snap;
}

}  // namespace

RunRecord run_experiment(const RunConfig& cfg, SampleSource& source,
                         const ProtocolObserver& observer) {
  cfg.validate();
  const Dictionary dictionary =
      linspace_dictionary(cfg.kernel_count, cfg.min_width, cfg.max_width);
  const std::size_t P = dictionary.size();
  const CostParams cost = cfg.cost();
  const NormaConfig norma = cfg.norma;
  const std::span<const NormaConfig> configs(&norma, 1);

  const std::size_t requested =
      cfg.workers == 0 ? worker_count_from_env() : cfg.workers;
  WorkerPool pool(std::min(requested, P));

  std::vector<Expansion> learners = make_learners(dictionary, norma.budget);
  std::vector<double> theta(P, 1.0 / double(P));
  std::vector<double> weights(P, 0.0);
  SlidingWindow window(norma.window_length);

  RunRecord record;
  record.window_length = norma.window_length;
  for (const auto& k : dictionary.kernels()) record.widths.push_back(k.width());

  double scheme_cum = 0.0;
  double omkr_cum = 0.0;
  std::vector<double> single_cum(P, 0.0);
  std::vector<Sample> observed;

  const std::size_t limit = cfg.steps;
  for (std::int64_t n = 1;; ++n) {
    if (limit != 0 && static_cast<std::size_t>(n) > limit) break;

    // f^(n) is fixed for every competitor at this point.
    if (observer) observer(n);
    std::optional<Sample> sample = source.next();
    if (!sample) {
      if (limit == 0) break;
      throw RunError(n, "data", fmt::format("stream ended after {} samples", n - 1));
    }
    try {
      window.push(*sample);
    } catch (const std::exception& e) {
      throw RunError(n, "data", e.what());
    }
    if (cfg.snapshot_step != 0 && static_cast<std::size_t>(n) <= cfg.snapshot_step)
      observed.push_back(*sample);

    const WindowPredictions predictions = predict_window(learners, window, pool);

    StepCosts row;
    row.step = n;
    row.single_inst.resize(P);
    for (std::size_t p = 0; p < P; ++p) {
      row.single_inst[p] =
          window_cost(window, cost, predictions[p], learners[p].norm_sq());
      single_cum[p] += row.single_inst[p];
    }
    row.scheme_inst =
        window_cost(window, cost, combined_estimates(theta, predictions, window.size()),
                    combined_norm_sq(theta, learners));
    row.omkr_inst = window_cost(
        window, cost, combined_estimates(weights, predictions, window.size()),
        combined_norm_sq(weights, learners));
    scheme_cum += row.scheme_inst;
    omkr_cum += row.omkr_inst;
    row.scheme_cum = scheme_cum;
    row.omkr_cum = omkr_cum;
    row.single_cum = single_cum;
    row.theta = theta;
    row.weights = weights;
    for (std::size_t p = 0; p < P; ++p)
      if (!std::isfinite(row.single_inst[p]))
        throw RunError(n, fmt::format("single_{}", p + 1), "non-finite cost");
    if (!std::isfinite(row.scheme_inst)) throw RunError(n, "scheme", "non-finite cost");
    if (!std::isfinite(row.omkr_inst)) throw RunError(n, "omkr", "non-finite cost");
    record.steps.push_back(std::move(row));

    if (cfg.snapshot_step != 0 && static_cast<std::size_t>(n) == cfg.snapshot_step)
      record.snapshot = take_snapshot(n, observed, cfg.snapshot_resolution,
                                      learners, theta, weights, single_cum);

    if (limit != 0 && static_cast<std::size_t>(n) == limit) break;

    // S_L^(n) is now revealed: build f^(n+1), theta^(n+1), w^(n+1).
    pool.parallel_for(P, [&](std::size_t p) {
      try {
        norma_update(learners[p], norma, window, cost.loss);
      } catch (const std::exception& e) {
        throw RunError(n, fmt::format("single_{}", p + 1), e.what());
      }
    });
    const WindowPredictions next_predictions =
        predict_window(learners, window, pool);
    try {
      const QpSolution qp = solve(
          assemble_qp(learners, next_predictions, cost, window, cfg.qp_delta));
      theta.assign(qp.theta.values().begin(), qp.theta.values().end());
    } catch (const std::exception& e) {
      throw RunError(n, "scheme", e.what());
    }
    const auto gradient = omkr_gradient(weights, learners, next_predictions, cost,
                                        window, cfg.reg_gradient);
    const double rate = cfg.omkr.rate(n + 1);
    for (std::size_t p = 0; p < P; ++p) weights[p] -= rate * gradient[p];
  }

  if (record.steps.empty()) throw RunError(1, "data", "no samples");
  return record;
}

}  // namespace okml
