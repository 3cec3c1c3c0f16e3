#include "okml/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include <fmt/format.h>
#include <tomlplusplus/toml.hpp>

#include "okml/errors.hpp"

namespace okml {

void RunConfig::validate() const {
  std::vector<std::string> problems;
  auto check = [&](auto&& fn) {
    try {
      fn();
    } catch (const ConfigError& e) {
      problems.emplace_back(e.what());
    }
  };

  check([&] { linspace_dictionary(kernel_count, min_width, max_width); });
  check([&] { norma.validate(); });
  check([&] { omkr.validate(); });
  check([&] { cost().validate(); });
  if (source == DataSourceKind::Ar1) {
    check([&] { ar1.validate(); });
    if (steps == 0) problems.emplace_back("run.steps must be >= 1 for ar1 data");
  } else if (csv_path.empty()) {
    problems.emplace_back("data.path is required when data.source = \"csv\"");
  }
  if (!(snapshot_resolution > 0.0) || !std::isfinite(snapshot_resolution))
    problems.emplace_back("run.snapshot_resolution must be positive");
  if (!(qp_delta >= 0.0) || !std::isfinite(qp_delta))
    problems.emplace_back("qp.delta must be finite and >= 0");

  if (!problems.empty()) {
    std::string message = "invalid configuration:";
    for (const auto& p : problems) message += "\n  - " + p;
    throw ConfigError(message);
  }
}

ConfigTable parse_config_text(const std::string& text) {
  toml::table doc;
  try {
    doc = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw ConfigError(fmt::format("config line {}: {}", e.source().begin.line,
                                  e.description()));
  }

  ConfigTable table;
  for (const auto& [section_key, section_node] : doc) {
    const std::string section(section_key.str());
    const auto* entries = section_node.as_table();
    if (!entries)
      throw ConfigError(fmt::format("config key '{}' must be inside a [section]", section));
    auto& out = table[section];
    for (const auto& [key_node, value] : *entries) {
      const std::string key(key_node.str());
      if (const auto* v = value.as_boolean())
        out[key] = v->get();
      else if (const auto* v = value.as_integer())
        out[key] = v->get();
      else if (const auto* v = value.as_floating_point())
        out[key] = v->get();
      else if (const auto* v = value.as_string())
        out[key] = v->get();
      else
        throw ConfigError(fmt::format(
            "config line {}: {}.{} must be a number, boolean or string",
            value.source().begin.line, section, key));
    }
  }
  return table;
}

namespace {

class TableReader {
 public:
  explicit TableReader(const ConfigTable& table) : table_(table) {}

  template <class T, class Fn>
  void read(const std::string& section, const std::string& key, Fn&& assign) {
    seen_.emplace_back(section + "." + key);
    auto s = table_.find(section);
    if (s == table_.end()) return;
    auto k = s->second.find(key);
    if (k == s->second.end()) return;
    const ConfigValue& v = k->second;
    if constexpr (std::is_same_v<T, double>) {
      if (auto* d = std::get_if<double>(&v)) return assign(*d);
      if (auto* i = std::get_if<std::int64_t>(&v)) return assign(double(*i));
      problems_.push_back(section + "." + key + " must be a number");
    } else if constexpr (std::is_same_v<T, std::int64_t>) {
      if (auto* i = std::get_if<std::int64_t>(&v)) return assign(*i);
      problems_.push_back(section + "." + key + " must be an integer");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (auto* b = std::get_if<bool>(&v)) return assign(*b);
      problems_.push_back(section + "." + key + " must be true or false");
    } else {
      if (auto* str = std::get_if<std::string>(&v)) return assign(*str);
      problems_.push_back(section + "." + key + " must be a quoted string");
    }
  }

  void count(const std::string& section, const std::string& key,
             std::size_t& out) {
    read<std::int64_t>(section, key, [&](std::int64_t v) {
      if (v < 0)
        problems_.push_back(section + "." + key + " must be nonnegative");
      else
        out = static_cast<std::size_t>(v);
    });
  }

  void problem(std::string message) { problems_.push_back(std::move(message)); }

  void finish() {
    for (const auto& [section, entries] : table_)
      for (const auto& [key, value] : entries) {
        const std::string name = section + "." + key;
        if (std::find(seen_.begin(), seen_.end(), name) == seen_.end())
          problems_.push_back("unknown config key '" + name + "'");
      }
    if (!problems_.empty()) {
      std::string message = "malformed configuration:";
      for (const auto& p : problems_) message += "\n  - " + p;
      throw ConfigError(message);
    }
  }

 private:
  const ConfigTable& table_;
  std::vector<std::string> seen_;
  std::vector<std::string> problems_;
};

}  // namespace

RunConfig config_from_table(const ConfigTable& table) {
  RunConfig cfg;
  TableReader r(table);

  r.count("kernel", "count", cfg.kernel_count);
  r.read<double>("kernel", "min_width", [&](double v) { cfg.min_width = v; });
  r.read<double>("kernel", "max_width", [&](double v) { cfg.max_width = v; });

  r.read<double>("norma", "learning_rate", [&](double v) { cfg.norma.learning_rate = v; });
  r.read<double>("norma", "regularizer", [&](double v) { cfg.norma.regularizer = v; });
  r.count("norma", "budget", cfg.norma.budget);
  r.count("norma", "window_length", cfg.norma.window_length);

  r.read<double>("omkr", "initial_rate", [&](double v) { cfg.omkr.initial = v; });
  r.read<std::int64_t>("omkr", "halving_period",
                       [&](std::int64_t v) { cfg.omkr.halving_period = v; });
  r.read<double>("omkr", "min_rate", [&](double v) { cfg.omkr.floor = v; });
  r.read<std::string>("omkr", "reg_gradient", [&](const std::string& v) {
    if (v == "as_written")
      cfg.reg_gradient = RegGradient::AsWritten;
    else if (v == "derived")
      cfg.reg_gradient = RegGradient::Derived;
    else
      r.problem("omkr.reg_gradient must be \"as_written\" or \"derived\"");
  });

  r.read<std::string>("data", "source", [&](const std::string& v) {
    if (v == "ar1")
      cfg.source = DataSourceKind::Ar1;
    else if (v == "csv")
      cfg.source = DataSourceKind::Csv;
    else
      r.problem("data.source must be \"ar1\" or \"csv\"");
  });
  r.read<double>("data", "phi", [&](double v) { cfg.ar1.phi = v; });
  r.read<double>("data", "noise_scale", [&](double v) { cfg.ar1.noise_scale = v; });
  r.read<bool>("data", "noise_is_variance", [&](bool v) { cfg.ar1.noise_is_variance = v; });
  r.read<double>("data", "y0", [&](double v) { cfg.ar1.y0 = v; });
  r.read<std::string>("data", "path", [&](const std::string& v) { cfg.csv_path = v; });
  r.read<std::string>("data", "x_column", [&](const std::string& v) { cfg.x_column = v; });
  r.read<std::string>("data", "y_column", [&](const std::string& v) { cfg.y_column = v; });

  r.count("run", "steps", cfg.steps);
  r.read<std::int64_t>("run", "seed", [&](std::int64_t v) {
    cfg.seed = static_cast<std::uint64_t>(v);
  });
  r.read<std::string>("run", "output_dir", [&](const std::string& v) { cfg.output_dir = v; });
  r.count("run", "snapshot_step", cfg.snapshot_step);
  r.read<double>("run", "snapshot_resolution",
                 [&](double v) { cfg.snapshot_resolution = v; });

  r.read<double>("qp", "delta", [&](double v) { cfg.qp_delta = v; });

  r.finish();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    throw IoError(fmt::format("config not found: {}", path.string()));
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot read config: {}", path.string()));
  std::ostringstream text;
  text << in.rdbuf();

  RunConfig cfg = config_from_table(parse_config_text(text.str()));
  if (cfg.source == DataSourceKind::Csv && cfg.csv_path.is_relative() &&
      !cfg.csv_path.empty())
    cfg.csv_path = path.parent_path() / cfg.csv_path;
  cfg.validate();
  return cfg;
}

}  // namespace okml
