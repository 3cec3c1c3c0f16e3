#include "okml/kernel.hpp"

#include <cmath>
#include <string>

#include "okml/errors.hpp"

namespace okml {

KernelSpec KernelSpec::gaussian(double width) {
  if (!std::isfinite(width) || width <= 0.0)
    throw ConfigError("kernel width must be positive and finite, got " +
                      std::to_string(width));
  return KernelSpec(KernelKind::Gaussian, width);
}

double KernelSpec::operator()(double x, double t) const noexcept {
  switch (kind_) {
    case KernelKind::Gaussian: {
      const double d = x - t;
      return std::exp(-0.5 * (d * d) / (width_ * width_));
    }
  }
  return 0.0;
}

double eval_kernel(const KernelSpec& spec, double x, double t) noexcept {
  return spec(x, t);
}

Dictionary::Dictionary(std::vector<KernelSpec> kernels)
    : kernels_(std::move(kernels)) {
  if (kernels_.empty()) throw ConfigError("dictionary needs at least one kernel");
}

Dictionary linspace_dictionary(std::size_t count, double min_width,
                               double max_width) {
  if (count == 0) throw ConfigError("kernel.count must be >= 1");
  if (!(min_width > 0.0) || !(max_width >= min_width) ||
      !std::isfinite(max_width))
    throw ConfigError("kernel widths must satisfy 0 < min_width <= max_width");

  std::vector<KernelSpec> kernels;
  kernels.reserve(count);
  if (count == 1) {
    kernels.push_back(KernelSpec::gaussian(min_width));
    return Dictionary(std::move(kernels));
  }
  const double span = max_width - min_width;
  const double last = static_cast<double>(count - 1);
  for (std::size_t p = 0; p < count; ++p) {
    // Pin the last width so the upper endpoint is exact.
    const double w = p + 1 == count
                         ? max_width
                         : min_width + span * (static_cast<double>(p) / last);
    kernels.push_back(KernelSpec::gaussian(w));
  }
  return Dictionary(std::move(kernels));
}

}  // namespace okml
