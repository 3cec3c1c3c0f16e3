#include "okml/cli.hpp"

#include <algorithm>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "okml/config.hpp"
#include "okml/errors.hpp"
#include "okml/experiment.hpp"
#include "okml/report.hpp"
#include "okml/simplex_qp.hpp"
#include "okml/stream.hpp"

namespace okml {

namespace {

std::string one_line(std::string message) {
  std::string out;
  for (std::size_t i = 0; i < message.size(); ++i) {
    if (message[i] == '\n') {
      out += ';';
      while (i + 1 < message.size() && message[i + 1] == ' ') ++i;
      out += ' ';
    } else {
      out += message[i];
    }
  }
  return out;
}

std::string join(std::span<const double> values, const char* spec) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += fmt::format(fmt::runtime(spec), values[i]);
  }
  return out + "]";
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"Online multi-kernel regression toolkit", "okml"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::optional<std::size_t> threads;
  auto* run = app.add_subcommand("run", "Run the streaming experiment and write CSV/SVG outputs");
  run->add_option("--config", config_path, "Run configuration file")->required();
  run->add_option("--seed", seed, "Override run.seed");
  run->add_option("--out", out_dir, "Override run.output_dir");
  run->add_option("--threads", threads,
                  "Worker threads (0 = one per hardware thread; default OKML_THREADS)");

  std::string synth_config;
  std::string synth_out;
  std::optional<std::uint64_t> synth_seed;
  auto* synth = app.add_subcommand("synth", "Write the configured AR(1) stream as CSV");
  synth->add_option("--config", synth_config, "Run configuration file")->required();
  synth->add_option("--out", synth_out, "Output CSV path")->required();
  synth->add_option("--seed", synth_seed, "Override run.seed");

  std::vector<double> qp_a, qp_b;
  double qp_delta = kDefaultQpDelta;
  auto* qp = app.add_subcommand("qp", "Solve one simplex-constrained diagonal QP");
  qp->add_option("--a", qp_a, "Diagonal entries, comma separated")->required()->delimiter(',');
  qp->add_option("--b", qp_b, "Linear term, comma separated")->required()->delimiter(',');
  qp->add_option("--delta", qp_delta, "Diagonal regularizer");

  std::vector<std::string> records;
  auto* compare = app.add_subcommand("compare", "Summarize several run directories");
  compare->add_option("--records", records, "Run output directories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "okml: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    if (*run) {
      RunConfig cfg = load_config(config_path);
      if (seed) cfg.seed = *seed;
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      cfg.workers = threads ? *threads : worker_count_from_env();
      const RunRecord record = run_experiment(cfg);
      emit_csv(record, cfg.output_dir);
      emit_plot(record, cfg.output_dir);
      const StepCosts& last = record.steps.back();
      const auto best = std::min_element(last.single_cum.begin(), last.single_cum.end());
      out << fmt::format(
          "steps {}: scheme CC {:.6g}, OMKR CC {:.6g}, best single CC {:.6g} (p={}); "
          "outputs in {}\n",
          last.step, last.scheme_cum, last.omkr_cum, *best,
          best - last.single_cum.begin() + 1, cfg.output_dir.string());
    } else if (*synth) {
      RunConfig cfg = load_config(synth_config);
      if (cfg.source != DataSourceKind::Ar1)
        throw ConfigError("synth requires data.source = \"ar1\"");
      Ar1Config ar1 = cfg.ar1;
      ar1.seed = synth_seed ? *synth_seed : cfg.seed;
      write_samples_csv(ar1_stream(ar1, cfg.steps), synth_out);
      out << fmt::format("wrote {} samples to {}\n", cfg.steps, synth_out);
    } else if (*qp) {
      const QpSolution sol = solve(QpInstance(qp_a, qp_b, qp_delta));
      out << "theta = " << join(sol.theta.values(), "{:.10g}") << "\n"
          << fmt::format("mu = {:.10g}\nrho = {}\n", sol.mu, sol.rho);
    } else if (*compare) {
      std::vector<std::filesystem::path> dirs(records.begin(), records.end());
      out << compare_runs(dirs);
    }
  } catch (const std::exception& e) {
    err << "okml: error: " << one_line(e.what()) << "\n";
    return 1;
  }
  return 0;
}

}  // namespace okml
