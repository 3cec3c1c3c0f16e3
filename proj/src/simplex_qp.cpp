#include "okml/simplex_qp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "okml/errors.hpp"

namespace okml {

namespace {

constexpr double kSimplexTolerance = 1e-12;

}  // namespace

SimplexWeights::SimplexWeights(std::vector<double> values)
    : values_(std::move(values)) {
  if (values_.empty()) throw InputError("simplex weights must be non-empty");
  double sum = 0.0;
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0)
      throw InputError("simplex weights must be finite and nonnegative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSimplexTolerance)
    throw InputError("simplex weights must sum to one, got sum " +
                     std::to_string(sum));
}

SimplexWeights SimplexWeights::uniform(std::size_t size) {
  return SimplexWeights(std::vector<double>(size, 1.0 / double(size)));
}

SimplexWeights SimplexWeights::vertex(std::size_t size, std::size_t p) {
  std::vector<double> v(size, 0.0);
  v.at(p) = 1.0;
  return SimplexWeights(std::move(v));
}

QpInstance::QpInstance(std::vector<double> a, std::vector<double> b,
                       double delta)
    : a_(std::move(a)), b_(std::move(b)), delta_(delta) {
  if (a_.empty()) throw ConfigError("QP instance is empty");
  if (a_.size() != b_.size())
    throw ConfigError("QP instance: a and b differ in length");
  if (!std::isfinite(delta_) || delta_ < 0.0)
    throw InputError("QP delta must be finite and nonnegative");
  for (std::size_t p = 0; p < a_.size(); ++p) {
    if (!std::isfinite(a_[p]) || !std::isfinite(b_[p]))
      throw InputError("QP instance has a non-finite entry at position " +
                       std::to_string(p));
    if (!(a_[p] + delta_ > 0.0))
      throw InputError("QP diagonal entry " + std::to_string(p) +
                       " is not positive after regularization");
  }
}

double QpInstance::objective(std::span<const double> theta) const {
  double value = 0.0;
  for (std::size_t p = 0; p < a_.size(); ++p)
    value += diagonal(p) * theta[p] * theta[p] + b_[p] * theta[p];
  return value;
}

double QpSolution::inequality_multiplier(const QpInstance& instance,
                                         std::size_t p) const {
  return 2.0 * theta[p] * instance.diagonal(p) + instance.b()[p] + mu;
}

QpSolution solve(const QpInstance& instance) {
  const std::size_t P = instance.size();
  const auto& b = instance.b();

  // The simplex is a single point; return it exactly rather than through
  // the division below.
  if (P == 1)
    return QpSolution{SimplexWeights({1.0}),
                      -(2.0 * instance.diagonal(0) + b[0]), 1};

  std::vector<std::size_t> order(P);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return b[l] < b[r]; });

  // phi_j = u_j - (sum_{i<=j} u_i/v_i + 2) / sum_{i<=j} 1/v_i. The entries
  // with phi_j < 0 form a prefix, so the scan stops at the first failure.
  double ratio_sum = 0.0;
  double inverse_sum = 0.0;
  double prefix_ratio = 0.0;
  double prefix_inverse = 0.0;
  std::size_t rho = 0;
  for (std::size_t j = 0; j < P; ++j) {
    const double u = b[order[j]];
    const double v = instance.diagonal(order[j]);
    ratio_sum += u / v;
    inverse_sum += 1.0 / v;
    const double phi = u - (ratio_sum + 2.0) / inverse_sum;
    // phi_1 = -2 v_1 analytically; never let rounding empty the support.
    if (!(phi < 0.0) && j > 0) break;
    rho = j + 1;
    prefix_ratio = ratio_sum;
    prefix_inverse = inverse_sum;
  }

  const double mu = -(2.0 + prefix_ratio) / prefix_inverse;

  std::vector<double> theta(P, 0.0);
  for (std::size_t j = 0; j < rho; ++j) {
    const std::size_t p = order[j];
    theta[p] = std::max(-(b[p] + mu) / (2.0 * instance.diagonal(p)), 0.0);
  }
  // b_p + mu cancels badly when a is tiny next to b; the sum can drift from
  // 1 by far more than rounding in the division, so renormalize.
  double total = 0.0;
  for (double t : theta) total += t;
  for (double& t : theta) t /= total;

  return QpSolution{SimplexWeights(std::move(theta)), mu, rho};
}

namespace {

// Michelot's method: threshold over the current support, drop entries that
// fall below it, repeat until the support is stable.
void project_into(std::span<const double> point, std::span<double> out,
                  std::vector<unsigned char>& active) {
  const std::size_t P = point.size();
  active.assign(P, 1);
  std::size_t support = P;
  double threshold = 0.0;
  for (;;) {
    double sum = 0.0;
    for (std::size_t p = 0; p < P; ++p)
      if (active[p]) sum += point[p];
    threshold = (sum - 1.0) / double(support);
    std::size_t dropped = 0;
    for (std::size_t p = 0; p < P; ++p) {
      if (active[p] && point[p] <= threshold) {
        active[p] = 0;
        ++dropped;
      }
    }
    if (dropped == 0 || dropped == support) break;
    support -= dropped;
  }

  double total = 0.0;
  for (std::size_t p = 0; p < P; ++p) {
    out[p] = std::max(point[p] - threshold, 0.0);
    total += out[p];
  }
  if (total <= 0.0) {
    std::fill(out.begin(), out.end(), 1.0 / double(P));
    return;
  }
  for (double& v : out) v /= total;
}

}  // namespace

std::vector<double> project_onto_simplex(std::span<const double> point) {
  if (point.empty()) throw InputError("cannot project an empty vector");
  if (!std::all_of(point.begin(), point.end(),
                   [](double v) { return std::isfinite(v); }))
    throw InputError("cannot project a non-finite vector");
  std::vector<double> out(point.size());
  std::vector<unsigned char> active;
  project_into(point, out, active);
  return out;
}

SimplexWeights oracle_solve(const QpInstance& instance, std::size_t iterations,
                            double step) {
  if (iterations == 0) throw ConfigError("oracle needs at least one iteration");
  if (!(step > 0.0)) throw ConfigError("oracle step must be positive");

  const std::size_t P = instance.size();
  std::vector<double> theta(P, 1.0 / double(P));
  std::vector<double> trial(P);
  std::vector<unsigned char> active;
  for (std::size_t it = 0; it < iterations; ++it) {
    for (std::size_t p = 0; p < P; ++p) {
      const double grad =
          2.0 * instance.diagonal(p) * theta[p] + instance.b()[p];
      trial[p] = theta[p] - step * grad;
    }
    project_into(trial, theta, active);
  }
  return SimplexWeights(std::move(theta));
}

}  // namespace okml
