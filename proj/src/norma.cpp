#include "okml/norma.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "okml/errors.hpp"

namespace okml {

void NormaConfig::validate() const {
  std::vector<std::string> problems;
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    problems.emplace_back("norma.learning_rate must be positive");
  if (!(regularizer > 0.0) || !std::isfinite(regularizer))
    problems.emplace_back("norma.regularizer must be positive");
  if (budget == 0) problems.emplace_back("norma.budget must be >= 1");
  if (window_length == 0) problems.emplace_back("norma.window_length must be >= 1");
  const double gamma = shrinkage();
  if (!(gamma > 0.0 && gamma < 1.0))
    problems.push_back(fmt::format(
        "norma shrinkage 1 - learning_rate * regularizer = {} is outside (0, 1)",
        gamma));
  if (!problems.empty()) throw ConfigError(fmt::format("{}", fmt::join(problems, "; ")));
}

double Loss::value(double estimate, double target) const noexcept {
  const double r = estimate - target;
  return r * r;
}

double Loss::derivative(double estimate, double target) const noexcept {
  return 2.0 * (estimate - target);
}

Expansion::Expansion(KernelSpec kernel, std::size_t budget)
    : kernel_(kernel), budget_(budget) {
  if (budget_ == 0) throw ConfigError("expansion budget must be >= 1");
}

Expansion Expansion::from_terms(KernelSpec kernel, std::size_t budget,
                                const std::vector<Term>& terms) {
  if (terms.size() > budget)
    throw ConfigError("more terms than the expansion budget");
  Expansion out(kernel, budget);
  for (const auto& t : terms) out.append(t.index, t.x, t.coefficient);
  return out;
}

double Expansion::operator()(double x) const noexcept {
  double value = 0.0;
  for (std::size_t i = 0; i < size_; ++i) {
    const Term& t = ring_[slot(i)];
    value += t.coefficient * kernel_(t.x, x);
  }
  return value;
}

double Expansion::norm_sq() const noexcept { return std::max(norm_sq_, 0.0); }

double Expansion::recompute_norm_sq() const {
  double total = 0.0;
  for (std::size_t i = 0; i < size_; ++i) {
    const Term& ti = ring_[slot(i)];
    for (std::size_t j = 0; j < size_; ++j) {
      const Term& tj = ring_[slot(j)];
      total += ti.coefficient * tj.coefficient * kernel_(ti.x, tj.x);
    }
  }
  return total;
}

std::vector<Term> Expansion::terms() const {
  std::vector<Term> out;
  out.reserve(size_);
  for (std::size_t i = 0; i < size_; ++i) out.push_back(ring_[slot(i)]);
  return out;
}

std::optional<std::size_t> Expansion::find(std::int64_t index) const noexcept {
  // Window lookups hit the newest terms, so scan backwards.
  for (std::size_t i = size_; i-- > 0;) {
    const std::int64_t stored = ring_[slot(i)].index;
    if (stored == index) return i;
    if (stored < index) break;
  }
  return std::nullopt;
}

void Expansion::scale(double factor) noexcept {
  for (std::size_t i = 0; i < size_; ++i) ring_[slot(i)].coefficient *= factor;
  norm_sq_ *= factor * factor;
}

double Expansion::weighted_row(std::size_t s) const noexcept {
  double total = 0.0;
  for (std::size_t j = 0; j < size_; ++j) {
    const std::size_t t = slot(j);
    total += ring_[t].coefficient * gram(s, t);
  }
  return total;
}

void Expansion::add_to_coefficient(std::size_t position, double delta) {
  if (position >= size_) throw ProtocolError("coefficient position out of range");
  const std::size_t s = slot(position);
  const double row = weighted_row(s);
  norm_sq_ += 2.0 * delta * row + delta * delta * gram(s, s);
  ring_[s].coefficient += delta;
}

void Expansion::evict_oldest() noexcept {
  const std::size_t s = slot(0);
  const double alpha = ring_[s].coefficient;
  const double row = weighted_row(s);
  norm_sq_ += -2.0 * alpha * row + alpha * alpha * gram(s, s);
  head_ = (head_ + 1) % capacity_;
  --size_;
  if (size_ == 0) {
    head_ = 0;
    norm_sq_ = 0.0;
  }
}

void Expansion::grow() {
  const std::size_t wanted = std::max<std::size_t>(2 * capacity_, 8);
  const std::size_t next = std::min(budget_, wanted);
  std::vector<Term> ring(next);
  std::vector<double> gram_next(next * next, 0.0);
  for (std::size_t i = 0; i < size_; ++i) {
    ring[i] = ring_[slot(i)];
    for (std::size_t j = 0; j < size_; ++j)
      gram_next[i * next + j] = gram(slot(i), slot(j));
  }
  ring_ = std::move(ring);
  gram_ = std::move(gram_next);
  capacity_ = next;
  head_ = 0;
}

void Expansion::append(std::int64_t index, double x, double coefficient) {
  if (size_ > 0 && index <= ring_[slot(size_ - 1)].index)
    throw ProtocolError(fmt::format(
        "center index {} does not follow the newest stored index {}", index,
        ring_[slot(size_ - 1)].index));
  if (size_ == budget_) evict_oldest();
  if (size_ == capacity_) grow();

  const std::size_t s = slot(size_);
  double row = 0.0;
  for (std::size_t j = 0; j < size_; ++j) {
    const std::size_t t = slot(j);
    const double k = kernel_(ring_[t].x, x);
    gram(s, t) = k;
    gram(t, s) = k;
    row += ring_[t].coefficient * k;
  }
  const double self = kernel_(x, x);
  gram(s, s) = self;
  ring_[s] = Term{index, x, coefficient};
  ++size_;
  norm_sq_ += 2.0 * coefficient * row + coefficient * coefficient * self;
}

double evaluate(const Expansion& expansion, double x) noexcept {
  return expansion(x);
}

double norm_sq(const Expansion& expansion) noexcept {
  return expansion.norm_sq();
}

void norma_update(Expansion& expansion, const NormaConfig& cfg,
                  const SlidingWindow& window, const Loss& loss) {
  if (window.empty())
    throw ProtocolError("NORMA step requested before any sample was revealed");

  std::vector<double> derivatives;
  derivatives.reserve(window.size());
  for (const Sample& s : window)
    derivatives.push_back(loss.derivative(expansion(s.x), s.y));

  expansion.scale(cfg.shrinkage());

  const std::size_t newest = window.size() - 1;
  for (std::size_t i = 0; i < newest; ++i) {
    if (auto position = expansion.find(window[i].index))
      expansion.add_to_coefficient(*position,
                                   -cfg.learning_rate * derivatives[i]);
  }
  const Sample& latest = window[newest];
  expansion.append(latest.index, latest.x,
                   -cfg.learning_rate * derivatives[newest]);
}

Expansion norma_step(const Expansion& expansion, const NormaConfig& cfg,
                     const SlidingWindow& window, const Loss& loss) {
  Expansion next = expansion;
  norma_update(next, cfg, window, loss);
  return next;
}

Expansion functional_gradient_oracle(const Expansion& expansion,
                                     const NormaConfig& cfg,
                                     const SlidingWindow& window,
                                     const Loss& loss) {
  if (window.empty())
    throw ProtocolError("NORMA step requested before any sample was revealed");

  const KernelSpec& kernel = expansion.kernel();
  std::vector<Term> terms = expansion.terms();
  auto naive_eval = [&](double x) {
    double v = 0.0;
    for (const Term& t : terms) v += t.coefficient * kernel(t.x, x);
    return v;
  };

  // f - lr * (sum_i l'_i k(x_i, .) + eta f)
  std::vector<Term> gradient_terms;
  for (const Sample& s : window)
    gradient_terms.push_back(
        Term{s.index, s.x, -cfg.learning_rate * loss.derivative(naive_eval(s.x), s.y)});
  const double gamma = 1.0 - cfg.learning_rate * cfg.regularizer;
  for (Term& t : terms) t.coefficient *= gamma;
  terms.insert(terms.end(), gradient_terms.begin(), gradient_terms.end());

  std::stable_sort(terms.begin(), terms.end(),
                   [](const Term& l, const Term& r) { return l.index < r.index; });
  std::vector<Term> merged;
  for (const Term& t : terms) {
    if (!merged.empty() && merged.back().index == t.index)
      merged.back().coefficient += t.coefficient;
    else
      merged.push_back(t);
  }
  return Expansion::from_terms(kernel, kUnboundedBudget, merged);
}

}  // namespace okml
