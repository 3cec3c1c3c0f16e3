#include "okml/stream.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "okml/errors.hpp"

namespace okml {

SlidingWindow::SlidingWindow(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ConfigError("window length must be >= 1");
}

void SlidingWindow::push(const Sample& sample) {
  if (sample.index != last_index_ + 1)
    throw ProtocolError(fmt::format(
        "out-of-order sample: expected index {}, got {}", last_index_ + 1,
        sample.index));
  samples_.push_back(sample);
  last_index_ = sample.index;
  if (samples_.size() > capacity_) samples_.pop_front();
}

const Sample& SlidingWindow::newest() const {
  if (samples_.empty()) throw ProtocolError("window is empty");
  return samples_.back();
}

const Sample& SlidingWindow::oldest() const {
  if (samples_.empty()) throw ProtocolError("window is empty");
  return samples_.front();
}

std::int64_t SlidingWindow::oldest_index() const noexcept {
  return samples_.empty() ? 0 : samples_.front().index;
}

bool SlidingWindow::contains(std::int64_t index) const noexcept {
  return !samples_.empty() && index >= samples_.front().index &&
         index <= last_index_;
}

void Ar1Config::validate() const {
  if (!(std::abs(phi) < 1.0))
    throw ConfigError(fmt::format("AR(1) requires |phi| < 1, got {}", phi));
  if (!std::isfinite(noise_scale) || noise_scale < 0.0)
    throw ConfigError("AR(1) noise_scale must be finite and >= 0");
  if (!std::isfinite(y0)) throw ConfigError("AR(1) y0 must be finite");
}

double Ar1Config::noise_std() const {
  return noise_is_variance ? std::sqrt(noise_scale) : noise_scale;
}

NormalSource::NormalSource(std::uint64_t seed) : engine_(seed) {}

double NormalSource::uniform() {
  constexpr double kTwoPowMinus53 = 1.0 / 9007199254740992.0;
  return static_cast<double>((engine_() >> 11) + 1) * kTwoPowMinus53;
}

double NormalSource::next() {
  if (spare_) {
    const double z = *spare_;
    spare_.reset();
    return z;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

std::vector<Sample> ar1_stream(const Ar1Config& cfg, std::size_t count) {
  cfg.validate();
  if (count == 0) throw ConfigError("stream length must be >= 1");
  NormalSource noise(cfg.seed);
  const double scale = cfg.noise_std();
  std::vector<Sample> out;
  out.reserve(count);
  double y = cfg.y0;
  for (std::size_t n = 1; n <= count; ++n) {
    y = cfg.phi * y + scale * noise.next();
    out.push_back(Sample{static_cast<std::int64_t>(n), static_cast<double>(n), y});
  }
  return out;
}

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' '))
      cell.pop_back();
    std::size_t lead = 0;
    while (lead < cell.size() && cell[lead] == ' ') ++lead;
    cells.push_back(cell.substr(lead));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::size_t find_column(const std::vector<std::string>& header,
                        const std::string& name,
                        const std::filesystem::path& path) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw InputError(
      fmt::format("{}: missing column '{}'", path.string(), name));
}

double parse_cell(const std::string& cell, std::size_t row,
                  const std::string& column, const std::filesystem::path& path) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (cell.empty() || ec != std::errc() || ptr != last)
    throw InputError(fmt::format("{}: row {}, column '{}': non-numeric value '{}'",
                                 path.string(), row, column, cell));
  if (!std::isfinite(value))
    throw InputError(fmt::format("{}: row {}, column '{}': non-finite value '{}'",
                                 path.string(), row, column, cell));
  return value;
}

}  // namespace

std::vector<Sample> csv_ingest(const std::filesystem::path& path,
                               const std::string& x_column,
                               const std::string& y_column) {
  if (!std::filesystem::exists(path))
    throw IoError(fmt::format("{}: file not found", path.string()));
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("{}: cannot open file", path.string()));

  std::string line;
  if (!std::getline(in, line))
    throw InputError(fmt::format("{}: no samples", path.string()));
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
    line.erase(0, 3);
  const auto header = split_row(line);
  const std::size_t x_col = find_column(header, x_column, path);
  const std::size_t y_col = find_column(header, y_column, path);

  std::vector<Sample> out;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++row;
    const auto cells = split_row(line);
    if (cells.size() != header.size())
      throw InputError(fmt::format("{}: row {} has {} cells, header has {}",
                                   path.string(), row, cells.size(),
                                   header.size()));
    const double x = parse_cell(cells[x_col], row, x_column, path);
    const double y = parse_cell(cells[y_col], row, y_column, path);
    if (!out.empty() && x < out.back().x)
      throw InputError(fmt::format("{}: row {}: rows must be ordered by '{}'",
                                   path.string(), row, x_column));
    out.push_back(Sample{static_cast<std::int64_t>(row), x, y});
  }
  if (out.empty())
    throw InputError(fmt::format("{}: no samples", path.string()));
  return out;
}

void write_samples_csv(const std::vector<Sample>& samples,
                       const std::filesystem::path& path,
                       const std::string& x_column,
                       const std::string& y_column) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("{}: cannot write file", path.string()));
  out << x_column << ',' << y_column << '\n';
  for (const auto& s : samples) out << fmt::format("{},{}\n", s.x, s.y);
  if (!out) throw IoError(fmt::format("{}: write failed", path.string()));
}

std::optional<Sample> VectorSource::next() {
  if (cursor_ >= samples_.size()) return std::nullopt;
  return samples_[cursor_++];
}

}  // namespace okml
