#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "okml/kernel.hpp"
#include "okml/stream.hpp"

namespace okml {

inline constexpr std::size_t kUnboundedBudget =
    std::numeric_limits<std::size_t>::max();

struct NormaConfig {
  double learning_rate = 0.05;
  /// eta; also the cost regularizer.
  double regularizer = 0.01;
  std::size_t budget = 100;
  std::size_t window_length = 10;

  /// 1 - learning_rate * regularizer.
  double shrinkage() const noexcept { return 1.0 - learning_rate * regularizer; }
  /// Throws ConfigError unless learning_rate, regularizer > 0, budget >= 1,
  /// window_length >= 1, and the shrinkage lies strictly inside (0, 1).
  void validate() const;
};

enum class LossKind { Squared };

class Loss {
 public:
  static Loss squared() noexcept { return Loss(LossKind::Squared); }

  LossKind kind() const noexcept { return kind_; }
  double value(double estimate, double target) const noexcept;
  /// Derivative with respect to the estimate.
  double derivative(double estimate, double target) const noexcept;

 private:
  explicit Loss(LossKind kind) noexcept : kind_(kind) {}
  LossKind kind_;
};

/// One term alpha * k(x, .) of a kernel expansion, tagged with the time
/// index of the sample that created it.
struct Term {
  std::int64_t index = 0;
  double x = 0.0;
  double coefficient = 0.0;
};

/// f(.) = sum_i alpha_i k(x_i, .) with at most `budget` terms, oldest first.
///
/// The Gram matrix of the live centers is cached in a ring buffer so that
/// appending or evicting a center costs O(size) kernel evaluations and the
/// squared RKHS norm alpha^T K alpha is maintained incrementally.
class Expansion {
 public:
  Expansion(KernelSpec kernel, std::size_t budget);

  /// Terms must have strictly increasing indices and fit in the budget.
  static Expansion from_terms(KernelSpec kernel, std::size_t budget,
                              const std::vector<Term>& terms);

  const KernelSpec& kernel() const noexcept { return kernel_; }
  std::size_t budget() const noexcept { return budget_; }
  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }

  double operator()(double x) const noexcept;

  /// Cached alpha^T K alpha.
  double norm_sq() const noexcept;
  /// alpha^T K alpha from fresh kernel evaluations, O(size^2).
  double recompute_norm_sq() const;

  /// i-th oldest term.
  const Term& term(std::size_t position) const {
    return ring_[slot(position)];
  }
  std::vector<Term> terms() const;
  std::optional<std::size_t> find(std::int64_t index) const noexcept;

  void scale(double factor) noexcept;
  void add_to_coefficient(std::size_t position, double delta);
  /// Appends a center; evicts the oldest one first when the budget is full.
  /// Throws ProtocolError unless `index` exceeds every stored index.
  void append(std::int64_t index, double x, double coefficient);

 private:
  std::size_t slot(std::size_t position) const noexcept {
    return (head_ + position) % capacity_;
  }
  double& gram(std::size_t s, std::size_t t) noexcept {
    return gram_[s * capacity_ + t];
  }
  double gram(std::size_t s, std::size_t t) const noexcept {
    return gram_[s * capacity_ + t];
  }
  /// sum_j alpha_j K(s, j) over live centers.
  double weighted_row(std::size_t s) const noexcept;
  void evict_oldest() noexcept;
  void grow();

  KernelSpec kernel_;
  std::size_t budget_;
  std::size_t capacity_ = 0;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
  std::vector<Term> ring_;
  std::vector<double> gram_;
  double norm_sq_ = 0.0;
};

double evaluate(const Expansion& expansion, double x) noexcept;
double norm_sq(const Expansion& expansion) noexcept;

/// In-place NORMA step: f^(n-1) -> f^(n) using the window S_L^(n-1), whose
/// newest sample becomes the new center. Loss derivatives are taken at the
/// pre-update estimate for every window sample. Window samples whose center
/// was already evicted contribute nothing.
/// Throws ProtocolError if the window is empty.
void norma_update(Expansion& expansion, const NormaConfig& cfg,
                  const SlidingWindow& window, const Loss& loss);

Expansion norma_step(const Expansion& expansion, const NormaConfig& cfg,
                     const SlidingWindow& window, const Loss& loss);

/// Reference update for tests: shrink every term, add one fresh term per
/// window sample, then merge terms sharing a time index. No budget.
Expansion functional_gradient_oracle(const Expansion& expansion,
                                     const NormaConfig& cfg,
                                     const SlidingWindow& window,
                                     const Loss& loss);

}  // namespace okml
