#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "okml/errors.hpp"
#include "okml/simplex_qp.hpp"

using namespace okml;

namespace {

QpInstance random_instance(std::mt19937_64& rng, std::size_t P) {
  std::uniform_real_distribution<double> a_dist(1e-3, 10.0);
  std::uniform_real_distribution<double> b_dist(-10.0, 10.0);
  std::vector<double> a(P), b(P);
  for (std::size_t p = 0; p < P; ++p) {
    a[p] = a_dist(rng);
    b[p] = b_dist(rng);
  }
  return QpInstance(a, b);
}

/// Exhaustive scan of the 2-simplex at the given resolution.
std::vector<double> grid_scan_3(const QpInstance& q, double resolution) {
  const int steps = static_cast<int>(std::lround(1.0 / resolution));
  std::vector<double> best{1.0, 0.0, 0.0};
  double best_value = q.objective(best);
  for (int i = 0; i <= steps; ++i)
    for (int j = 0; i + j <= steps; ++j) {
      std::vector<double> t{i * resolution, j * resolution,
                            (steps - i - j) * resolution};
      const double v = q.objective(t);
      if (v < best_value) {
        best_value = v;
        best = t;
      }
    }
  return best;
}

double sum(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0);
}

}  // namespace

TEST_CASE("single component forces theta = 1") {
  const auto sol = solve(QpInstance({1.0}, {7.0}));
  CHECK(sol.theta[0] == 1.0);
  CHECK(sol.rho == 1);
  CHECK(sol.inequality_multiplier(QpInstance({1.0}, {7.0}), 0) ==
        doctest::Approx(0.0));
}

TEST_CASE("symmetric instance splits evenly") {
  const auto sol = solve(QpInstance({1.0, 1.0}, {0.0, 0.0}));
  CHECK(sol.theta[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(sol.theta[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(sol.rho == 2);
}

TEST_CASE("dominated component is switched off") {
  // u = [0, 10], v = [1, 1]: phi_1 = -2 < 0, phi_2 = 10 - (0 + 10 + 2) / 2
  // = 4 >= 0, so rho = 1 and mu = -2.
  const QpInstance q({1.0, 1.0}, {0.0, 10.0});
  const auto sol = solve(q);
  CHECK(sol.theta[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(sol.theta[1] == 0.0);
  CHECK(sol.mu == doctest::Approx(-2.0).epsilon(1e-11));
  CHECK(sol.rho == 1);

  const auto oracle = oracle_solve(q, 20000, 1e-3);
  CHECK(oracle[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(q.objective(sol.theta.values()) <= q.objective(oracle.values()) + 1e-12);
}

TEST_CASE("three-component instance agrees with both oracles") {
  const QpInstance q({1.0, 2.0, 3.0}, {-1.0, 0.0, 2.0});
  const auto sol = solve(q);
  const auto pgd = oracle_solve(q, 100000, 1e-3);
  const auto grid = grid_scan_3(q, 1e-3);

  const double exact = q.objective(sol.theta.values());
  CHECK(std::abs(q.objective(pgd.values()) - q.objective(grid)) <= 1e-4);
  CHECK(exact <= q.objective(pgd.values()) + 1e-7);
  CHECK(exact <= q.objective(grid) + 1e-12);
  for (std::size_t p = 0; p < 3; ++p)
    CHECK(sol.theta[p] == doctest::Approx(pgd[p]).epsilon(1e-6));

  // Frozen from the oracles above (KKT: rho = 2, mu = -2/3).
  CHECK(sol.theta[0] == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  CHECK(sol.theta[1] == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(sol.theta[2] == 0.0);
  CHECK(sol.rho == 2);
  CHECK(sol.mu == doctest::Approx(-2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("invalid instances") {
  CHECK_THROWS_AS(QpInstance({}, {}), ConfigError);
  CHECK_THROWS_AS(QpInstance({1.0, 2.0}, {1.0}), ConfigError);
  CHECK_THROWS_AS(QpInstance({1.0, std::nan("")}, {1.0, 2.0}), InputError);
  CHECK_THROWS_AS(QpInstance({1.0, 1.0}, {INFINITY, 2.0}), InputError);
  CHECK_THROWS_AS(QpInstance({0.0}, {1.0}, 0.0), InputError);
  CHECK_NOTHROW(QpInstance({0.0}, {1.0}));
}

TEST_CASE("oracle solver examples") {
  CHECK(oracle_solve(QpInstance({1.0}, {7.0}), 5, 1e-3)[0] == 1.0);
  const auto half = oracle_solve(QpInstance({1.0, 1.0}, {0.0, 0.0}), 1000, 1e-3);
  CHECK(half[0] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(half[1] == doctest::Approx(0.5).epsilon(1e-6));

  std::mt19937_64 rng(2024);
  const QpInstance q = random_instance(rng, 5);
  const auto oracle = oracle_solve(q, 100000, 1e-3);
  CHECK(std::abs(q.objective(oracle.values()) - q.objective(solve(q).theta.values())) <=
        1e-8);

  CHECK_THROWS_AS(oracle_solve(q, 0, 1e-3), ConfigError);
}

TEST_CASE("projection onto the simplex") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t P = 1 + trial % 12;
    std::vector<double> v(P);
    for (auto& x : v) x = dist(rng);
    const auto proj = project_onto_simplex(v);
    CHECK(sum(proj) == doctest::Approx(1.0).epsilon(1e-14));
    // ||t - v||^2 = t^T t - 2 v^T t + const: the same QP with a = 1, b = -2v.
    std::vector<double> a(P, 1.0), b(P);
    for (std::size_t p = 0; p < P; ++p) b[p] = -2.0 * v[p];
    const auto sol = solve(QpInstance(a, b, 0.0));
    for (std::size_t p = 0; p < P; ++p)
      CHECK(proj[p] == doctest::Approx(sol.theta[p]).epsilon(1e-12));
  }
  CHECK_THROWS_AS(project_onto_simplex(std::vector<double>{}), InputError);
}

TEST_CASE("solutions are feasible and satisfy KKT") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t P = 1 + trial % 20;
    const QpInstance q = random_instance(rng, P);
    const auto sol = solve(q);
    double total = 0.0;
    std::size_t positive = 0;
    for (std::size_t p = 0; p < P; ++p) {
      CHECK(sol.theta[p] >= 0.0);
      total += sol.theta[p];
      if (sol.theta[p] > 0.0) {
        ++positive;
        CHECK(std::abs(sol.inequality_multiplier(q, p)) <= 1e-9);
      } else {
        CHECK(q.b()[p] + sol.mu >= -1e-9);
      }
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
    CHECK(positive == sol.rho);
  }
}

TEST_CASE("active set is a prefix of b sorted ascending") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t P = 1 + trial % 20;
    const QpInstance q = random_instance(rng, P);
    const auto sol = solve(q);

    std::vector<std::size_t> order(P);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](auto l, auto r) { return q.b()[l] < q.b()[r]; });
    double ratio = 0.0, inverse = 0.0;
    for (std::size_t j = 0; j < P; ++j) {
      const double v = q.diagonal(order[j]);
      ratio += q.b()[order[j]] / v;
      inverse += 1.0 / v;
      const double phi = q.b()[order[j]] - (ratio + 2.0) / inverse;
      if (j < sol.rho) {
        CHECK(phi < 0.0);
        CHECK(sol.theta[order[j]] > 0.0);
      } else {
        CHECK(phi >= 0.0);
        CHECK(sol.theta[order[j]] == 0.0);
      }
    }
  }
}

TEST_CASE("solutions beat the projected-gradient oracle") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t P = 1 + trial % 20;
    const QpInstance q = random_instance(rng, P);
    const auto exact = solve(q);
    const auto approx = oracle_solve(q, 20000, 1e-3);
    CHECK(q.objective(exact.theta.values()) <= q.objective(approx.values()) + 1e-7);
  }
}

TEST_CASE("permutation equivariance and scale invariance") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t P = 1 + trial % 20;
    const QpInstance q = random_instance(rng, P);
    const auto base = solve(q);

    std::vector<std::size_t> perm(P);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> a(P), b(P);
    for (std::size_t p = 0; p < P; ++p) {
      a[p] = q.a()[perm[p]];
      b[p] = q.b()[perm[p]];
    }
    const auto permuted = solve(QpInstance(a, b));
    for (std::size_t p = 0; p < P; ++p)
      CHECK(permuted.theta[p] == doctest::Approx(base.theta[perm[p]]).epsilon(1e-12));

    // Power-of-two scaling is exact in floating point; any other factor
    // only perturbs the last bits.
    for (double c : {4.0, 0.125, 3.7}) {
      std::vector<double> ca(q.a()), cb(q.b());
      for (auto& v : ca) v *= c;
      for (auto& v : cb) v *= c;
      const auto unscaled = solve(QpInstance(q.a(), q.b(), 0.0));
      const auto scaled = solve(QpInstance(ca, cb, 0.0));
      for (std::size_t p = 0; p < P; ++p) {
        if (c != 3.7)
          CHECK(scaled.theta[p] == unscaled.theta[p]);
        else
          CHECK(std::abs(scaled.theta[p] - unscaled.theta[p]) <= 1e-12);
      }
    }
  }
}

TEST_CASE("ties in b resolve deterministically") {
  const QpInstance q({1.0, 2.0, 1.0}, {0.5, 0.5, 0.5});
  const auto first = solve(q);
  const auto second = solve(q);
  for (std::size_t p = 0; p < 3; ++p) CHECK(first.theta[p] == second.theta[p]);
  CHECK(first.rho == 3);
  CHECK(first.theta[0] == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(first.theta[1] == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("simplex weights validation") {
  CHECK_THROWS_AS(SimplexWeights({0.5, 0.6}), InputError);
  CHECK_THROWS_AS(SimplexWeights({1.5, -0.5}), InputError);
  CHECK_THROWS_AS(SimplexWeights(std::vector<double>{}), InputError);
  CHECK(SimplexWeights::uniform(4)[2] == 0.25);
  CHECK(SimplexWeights::vertex(3, 1)[1] == 1.0);
}
