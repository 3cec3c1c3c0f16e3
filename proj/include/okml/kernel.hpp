#pragma once

#include <cstddef>
#include <vector>

namespace okml {

enum class KernelKind { Gaussian };

/// One reproducing kernel of the dictionary. Immutable once built.
class KernelSpec {
 public:
  /// Throws ConfigError unless width is finite and > 0.
  static KernelSpec gaussian(double width);

  KernelKind kind() const noexcept { return kind_; }
  double width() const noexcept { return width_; }

  double operator()(double x, double t) const noexcept;

 private:
  KernelSpec(KernelKind kind, double width) noexcept
      : kind_(kind), width_(width) {}

  KernelKind kind_;
  double width_;
};

/// k(x, t) for the given kernel. Gaussian: exp(-(x-t)^2 / (2 width^2)).
double eval_kernel(const KernelSpec& spec, double x, double t) noexcept;

/// Ordered, fixed set of kernels; the position p identifies a learner.
class Dictionary {
 public:
  explicit Dictionary(std::vector<KernelSpec> kernels);

  std::size_t size() const noexcept { return kernels_.size(); }
  const KernelSpec& operator[](std::size_t p) const { return kernels_[p]; }
  const std::vector<KernelSpec>& kernels() const noexcept { return kernels_; }

 private:
  std::vector<KernelSpec> kernels_;
};

/// `count` Gaussian kernels with widths linearly spaced over
/// [min_width, max_width], both endpoints included.
Dictionary linspace_dictionary(std::size_t count, double min_width,
                               double max_width);

}  // namespace okml
