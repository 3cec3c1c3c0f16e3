#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "okml/errors.hpp"
#include "okml/experiment.hpp"

using namespace okml;

namespace {

RunConfig small_config(std::size_t steps, std::size_t kernels = 5) {
  RunConfig cfg;
  cfg.kernel_count = kernels;
  cfg.steps = steps;
  cfg.seed = 3;
  cfg.snapshot_step = 0;
  return cfg;
}

std::vector<Sample> stream_for(const RunConfig& cfg) {
  Ar1Config ar = cfg.ar1;
  ar.seed = cfg.seed;
  return ar1_stream(ar, cfg.steps);
}

/// Records the order of observer calls and sample fetches.
class TracingSource : public SampleSource {
 public:
  TracingSource(std::vector<Sample> samples, std::vector<std::string>& log)
      : inner_(std::move(samples)), log_(log) {}
  std::optional<Sample> next() override {
    auto s = inner_.next();
    if (s) log_.push_back("fetch " + std::to_string(s->index));
    return s;
  }

 private:
  VectorSource inner_;
  std::vector<std::string>& log_;
};

}  // namespace

TEST_CASE("single step charges the initial estimates") {
  const auto cfg = small_config(1);
  const auto rec = run_experiment(cfg);
  REQUIRE(rec.steps.size() == 1);
  const auto& row = rec.steps[0];
  const double y = stream_for(cfg)[0].y;
  // Every estimate is still zero, so each competitor pays y^2.
  CHECK(row.scheme_inst == y * y);
  CHECK(row.omkr_inst == y * y);
  CHECK(row.scheme_cum == row.scheme_inst);
  CHECK(row.omkr_cum == row.omkr_inst);
  for (std::size_t p = 0; p < 5; ++p) {
    CHECK(row.single_cum[p] == row.single_inst[p]);
    CHECK(row.theta[p] == 0.2);
    CHECK(row.weights[p] == 0.0);
  }
}

TEST_CASE("one kernel: scheme and single learner coincide") {
  auto cfg = small_config(120, 1);
  cfg.min_width = cfg.max_width = 2.0;
  const auto rec = run_experiment(cfg);
  for (const auto& row : rec.steps) {
    CHECK(row.scheme_inst == row.single_inst[0]);
    CHECK(row.scheme_cum == row.single_cum[0]);
    CHECK(row.theta[0] == 1.0);
  }
}

TEST_CASE("cumulative costs never decrease") {
  const auto rec = run_experiment(small_config(80));
  for (std::size_t n = 1; n < rec.steps.size(); ++n) {
    const auto& a = rec.steps[n - 1];
    const auto& b = rec.steps[n];
    CHECK(b.step == a.step + 1);
    CHECK(b.scheme_cum >= a.scheme_cum);
    CHECK(b.omkr_cum >= a.omkr_cum);
    for (std::size_t p = 0; p < 5; ++p) CHECK(b.single_cum[p] >= a.single_cum[p]);
  }
}

TEST_CASE("estimates are fixed before each sample is revealed") {
  const auto cfg = small_config(6);
  std::vector<std::string> log;
  TracingSource source(stream_for(cfg), log);
  run_experiment(cfg, source, [&](std::int64_t n) { log.push_back("fix " + std::to_string(n)); });
  std::vector<std::string> expected;
  for (int n = 1; n <= 6; ++n) {
    expected.push_back("fix " + std::to_string(n));
    expected.push_back("fetch " + std::to_string(n));
  }
  CHECK(log == expected);
}

TEST_CASE("worker count does not change the record") {
  auto cfg = small_config(60, 20);
  cfg.workers = 1;
  const auto serial = run_experiment(cfg);
  cfg.workers = 4;
  const auto parallel = run_experiment(cfg);
  REQUIRE(serial.steps.size() == parallel.steps.size());
  for (std::size_t n = 0; n < serial.steps.size(); ++n) {
    CHECK(serial.steps[n].scheme_cum == parallel.steps[n].scheme_cum);
    CHECK(serial.steps[n].omkr_cum == parallel.steps[n].omkr_cum);
    CHECK(serial.steps[n].single_cum == parallel.steps[n].single_cum);
    CHECK(serial.steps[n].theta == parallel.steps[n].theta);
    CHECK(serial.steps[n].weights == parallel.steps[n].weights);
  }
}

TEST_CASE("driver matches chained combiner steps") {
  const auto cfg = small_config(40);
  const auto rec = run_experiment(cfg);
  const auto dict = linspace_dictionary(cfg.kernel_count, cfg.min_width, cfg.max_width);
  const auto cost = cfg.cost();
  WorkerPool pool(1);
  auto scheme = SchemeState::initial(dict, cfg.norma.budget);
  auto omkr = OmkrState::initial(dict, cfg.norma.budget, cfg.omkr, cfg.reg_gradient);
  SlidingWindow w(cfg.norma.window_length);
  const auto samples = stream_for(cfg);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    w.push(samples[i]);
    const double scheme_cost =
        incurred_cost([&](double x) { return predict(scheme, x); }, cost, w,
                      combined_norm_sq(scheme.theta.values(), scheme.learners));
    const double omkr_cost =
        incurred_cost([&](double x) { return predict(omkr, x); }, cost, w,
                      combined_norm_sq(omkr.weights, omkr.learners));
    CHECK(rec.steps[i].scheme_inst == doctest::Approx(scheme_cost).epsilon(1e-12));
    CHECK(rec.steps[i].omkr_inst == doctest::Approx(omkr_cost).epsilon(1e-12));
    for (std::size_t p = 0; p < dict.size(); ++p) {
      CHECK(rec.steps[i].theta[p] == scheme.theta[p]);
      CHECK(rec.steps[i].weights[p] == omkr.weights[p]);
    }
    scheme = scheme_step(scheme, std::span(&cfg.norma, 1), cost, w, pool, cfg.qp_delta);
    omkr = omkr_step(omkr, std::span(&cfg.norma, 1), cost, w, pool);
  }
}

TEST_CASE("snapshot at step 42") {
  auto cfg = small_config(50);
  cfg.snapshot_step = 42;
  const auto rec = run_experiment(cfg);
  REQUIRE(rec.snapshot.has_value());
  const auto& snap = *rec.snapshot;
  CHECK(snap.step == 42);
  REQUIRE(snap.grid.size() == 165);
  CHECK(snap.grid.front() == 1.0);
  CHECK(snap.grid.back() == 42.0);
  CHECK(snap.scheme.size() == 165);
  CHECK(snap.omkr.size() == 165);
  CHECK(snap.best_single.size() == 165);
  CHECK(snap.worst_single.size() == 165);
  CHECK(snap.observed.size() == 42);

  const auto& cum = rec.steps[41].single_cum;
  for (double c : cum) {
    CHECK(cum[snap.best] <= c);
    CHECK(cum[snap.worst] >= c);
  }
}

TEST_CASE("run errors name the step and competitor") {
  auto cfg = small_config(10);
  VectorSource short_source(stream_for(small_config(4)));
  try {
    run_experiment(cfg, short_source);
    FAIL("expected a run error");
  } catch (const RunError& e) {
    CHECK(e.step() == 5);
    CHECK(e.competitor() == "data");
    CHECK(std::string(e.what()).find("step 5") != std::string::npos);
  }

  auto bad = small_config(10);
  bad.norma.window_length = 0;
  CHECK_THROWS_AS(run_experiment(bad), ConfigError);
}

TEST_CASE("csv input runs every row when steps is 0") {
  const auto path = std::filesystem::temp_directory_path() / "okml_test_experiment.csv";
  write_samples_csv(stream_for(small_config(25)), path);
  auto cfg = small_config(0);
  cfg.source = DataSourceKind::Csv;
  cfg.csv_path = path;
  CHECK(run_experiment(cfg).steps.size() == 25);
  cfg.steps = 30;
  CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
}
