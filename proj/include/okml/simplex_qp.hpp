#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace okml {

/// Default diagonal regularizer added to every a_p before solving.
inline constexpr double kDefaultQpDelta = 1e-12;

/// A point of the probability simplex: values >= 0 summing to one.
class SimplexWeights {
 public:
  /// Throws InputError if any value is negative or non-finite, or the sum
  /// deviates from one by more than 1e-12.
  explicit SimplexWeights(std::vector<double> values);

  static SimplexWeights uniform(std::size_t size);
  static SimplexWeights vertex(std::size_t size, std::size_t p);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t p) const { return values_[p]; }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

/// min  theta^T diag(a + delta) theta + b^T theta  over the simplex.
class QpInstance {
 public:
  /// Throws ConfigError for empty or mismatched vectors and InputError for
  /// non-finite entries or a non-positive effective diagonal.
  QpInstance(std::vector<double> a, std::vector<double> b,
             double delta = kDefaultQpDelta);

  std::size_t size() const noexcept { return a_.size(); }
  const std::vector<double>& a() const noexcept { return a_; }
  const std::vector<double>& b() const noexcept { return b_; }
  double delta() const noexcept { return delta_; }
  /// a_p + delta.
  double diagonal(std::size_t p) const { return a_[p] + delta_; }

  double objective(std::span<const double> theta) const;

 private:
  std::vector<double> a_;
  std::vector<double> b_;
  double delta_;
};

struct QpSolution {
  SimplexWeights theta;
  /// Multiplier of the sum-to-one constraint.
  double mu;
  /// Number of leading entries (b sorted ascending) that are positive.
  std::size_t rho;

  /// KKT multiplier of theta_p >= 0: 2 theta_p a_p + b_p + mu.
  double inequality_multiplier(const QpInstance& instance,
                               std::size_t p) const;
};

/// Exact solution by sorting b, locating the active prefix length rho with
/// running sums, and reading theta off the stationarity conditions.
/// O(P log P).
QpSolution solve(const QpInstance& instance);

/// Euclidean projection onto the simplex by iterated thresholding over the
/// shrinking support (no sorting).
std::vector<double> project_onto_simplex(std::span<const double> point);

/// Projected-gradient descent from the barycenter. Reference solver for
/// tests; every iterate is feasible.
SimplexWeights oracle_solve(const QpInstance& instance, std::size_t iterations,
                            double step);

}  // namespace okml
