#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace okml {

struct Sample {
  /// 1-based time index n.
  std::int64_t index = 0;
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

/// The last `capacity` labeled samples, oldest first. Indices are always
/// consecutive and end at the most recent push.
class SlidingWindow {
 public:
  explicit SlidingWindow(std::size_t capacity);

  /// Throws ProtocolError unless sample.index is the next index (1 when the
  /// window has never been fed).
  void push(const Sample& sample);

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }

  const Sample& newest() const;
  const Sample& oldest() const;
  /// max(n - L + 1, 1) for the newest index n; 0 when empty.
  std::int64_t oldest_index() const noexcept;
  std::int64_t newest_index() const noexcept { return last_index_; }

  bool contains(std::int64_t index) const noexcept;

  auto begin() const noexcept { return samples_.begin(); }
  auto end() const noexcept { return samples_.end(); }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }

 private:
  std::size_t capacity_;
  std::int64_t last_index_ = 0;
  std::deque<Sample> samples_;
};

struct Ar1Config {
  double phi = 0.5488135;
  /// Standard deviation of the innovations (variance if noise_is_variance).
  double noise_scale = 0.71519837;
  bool noise_is_variance = false;
  double y0 = 0.0;
  std::uint64_t seed = 0;

  /// Throws ConfigError unless |phi| < 1 and noise_scale >= 0.
  void validate() const;
  double noise_std() const;
};

/// Seeded standard normal generator.
///
/// Uniforms come from std::mt19937_64, whose output sequence is fixed by the
/// C++ standard, mapped to (0, 1] as ((r >> 11) + 1) * 2^-53. Normals use the
/// basic Box-Muller transform; each pair of uniforms yields two variates
/// (cosine branch first).
class NormalSource {
 public:
  explicit NormalSource(std::uint64_t seed);
  double next();

 private:
  double uniform();

  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

/// y(n) = phi y(n-1) + u(n), x(n) = n, for n = 1..count.
std::vector<Sample> ar1_stream(const Ar1Config& cfg, std::size_t count);

/// Reads a headered CSV. Samples are indexed 1..N in row order.
/// Throws IoError for a missing/unreadable file and InputError for missing
/// columns, non-numeric or non-finite cells, decreasing x, or no rows.
std::vector<Sample> csv_ingest(const std::filesystem::path& path,
                               const std::string& x_column,
                               const std::string& y_column);

/// Writes samples as `x,y` CSV readable by csv_ingest.
void write_samples_csv(const std::vector<Sample>& samples,
                       const std::filesystem::path& path,
                       const std::string& x_column = "x",
                       const std::string& y_column = "y");

/// Pull-based sample feed consumed by the experiment driver.
class SampleSource {
 public:
  virtual ~SampleSource() = default;
  virtual std::optional<Sample> next() = 0;
};

class VectorSource : public SampleSource {
 public:
  explicit VectorSource(std::vector<Sample> samples)
      : samples_(std::move(samples)) {}
  std::optional<Sample> next() override;

 private:
  std::vector<Sample> samples_;
  std::size_t cursor_ = 0;
};

}  // namespace okml
