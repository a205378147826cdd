#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "lsv/experiments.hpp"

using namespace lsv;

TEST_CASE("observable catalog") {
  Observable id = observable_by_name("id");
  CHECK(id.f(0.3) == 0.3);
  CHECK(id.lipschitz == 1.0);
  Observable c = observable_by_name("cos2pi");
  CHECK(c.f(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(c.f(0.5) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(c.lipschitz == doctest::Approx(2.0 * 3.14159265358979324).epsilon(1e-15));
  Observable t = observable_by_name("tent");
  CHECK(t.f(0.5) == 0.0);
  CHECK(t.f(0.0) == 0.5);
  CHECK_THROWS_AS(observable_by_name("nope"), std::invalid_argument);
}

TEST_CASE("memory_loss_experiment: identical densities and monotonicity") {
  auto seq = ParameterSequence::constant(0.5, 128, 0.5);
  auto edges = GridDensity::make_edges(2048);
  GridDensity f = GridDensity::uniform(edges);
  std::vector<std::size_t> n_grid = {4, 8, 16, 32, 64, 128};

  ExperimentReport same = memory_loss_experiment(seq, f, f, n_grid, 4, 128);
  for (auto& [n, tv] : same.series) CHECK(tv == 0.0);
  CHECK_FALSE(same.fit.defined);

  GridDensity g = GridDensity::from_function(
      edges, [](double x) { return 1.0 + 0.5 * x * std::cos(2.0 * 3.14159265358979324 * x); },
      true);
  ExperimentReport rep = memory_loss_experiment(seq, f, g, n_grid, 4, 128);
  REQUIRE(rep.series.size() == n_grid.size());
  double prev = 2.0;
  for (auto& [n, tv] : rep.series) {
    CHECK(tv > 0.0);
    CHECK(tv <= prev + 1e-13);
    prev = tv;
  }
  CHECK(rep.fit.defined);
  CHECK(rep.fit.slope < 0.0);

  GridDensity other = GridDensity::uniform(GridDensity::make_edges(1024));
  CHECK_THROWS_AS(memory_loss_experiment(seq, f, other, n_grid, 4, 128), std::invalid_argument);
  CHECK_THROWS_AS(memory_loss_experiment(seq, f, g, {256}, 4, 256), std::out_of_range);
}

TEST_CASE("run_trajectories: reproducibility, running max, centering") {
  auto seq = ParameterSequence::constant(0.4, 64, 0.4);
  auto edges = GridDensity::make_edges(2048);
  GridDensity mu = GridDensity::uniform(edges);
  ObservableSpec obs;
  obs.kind = ObservableKind::RunningMax;
  obs.v = observable_by_name("cos2pi");
  std::vector<std::size_t> n_grid = {8, 16, 32, 64};

  TrajectoryBatch a = run_trajectories(seq, mu, obs, n_grid, 500, 42);
  TrajectoryBatch b = run_trajectories(seq, mu, obs, n_grid, 500, 42);
  TrajectoryBatch c = run_trajectories(seq, mu, obs, n_grid, 500, 43);
  CHECK(a.s_n == b.s_n);
  CHECK(a.s_star == b.s_star);
  CHECK(a.s_n != c.s_n);

  for (std::size_t s = 0; s < a.samples; ++s) {
    double prev_star = 0.0;
    for (std::size_t j = 0; j < n_grid.size(); ++j) {
      CHECK(a.star(s, j) >= std::abs(a.sum(s, j)) - 1e-12);
      CHECK(a.star(s, j) >= prev_star - 1e-12);
      prev_star = a.star(s, j);
    }
  }

  // centering: the empirical mean of S_n vanishes by construction
  for (std::size_t j = 0; j < n_grid.size(); ++j) {
    double mean = 0.0;
    for (std::size_t s = 0; s < a.samples; ++s) mean += a.sum(s, j);
    mean /= static_cast<double>(a.samples);
    CHECK(std::abs(mean) < 1e-9);
  }
}

TEST_CASE("moments_experiment: small run sanity") {
  auto seq = ParameterSequence::constant(1.0 / 3.0, 64, 1.0 / 3.0);
  auto edges = GridDensity::make_edges(2048);
  GridDensity mu = GridDensity::uniform(edges);
  ObservableSpec obs;
  obs.v = observable_by_name("cos2pi");
  MomentsReport rep =
      moments_experiment(seq, mu, obs, {2.0, 4.0}, {8, 16, 32, 64}, 400, 7, 8, 64);
  REQUIRE(rep.moments.size() == 2);
  CHECK(rep.moments[0].p == 2.0);
  for (const auto& ms : rep.moments) {
    double prev = 0.0;
    for (auto& [n, v] : ms.series) {
      CHECK(v > 0.0);
      CHECK(v >= prev);  // moments of a running max grow with n
      prev = v;
    }
    CHECK(ms.fit.defined);
  }
}

TEST_CASE("tail and deviation experiments: small run sanity") {
  auto seq = ParameterSequence::constant(0.75, 64, 0.75);
  auto edges = GridDensity::make_edges(2048);
  GridDensity mu = GridDensity::uniform(edges);
  ObservableSpec obs;
  obs.v = observable_by_name("cos2pi");
  std::vector<double> t_grid;
  for (double t = 1.0; t <= 64.0; t *= 1.5) t_grid.push_back(t);
  ExperimentReport tail = tail_experiment(seq, mu, obs, 64, t_grid, 3000, 9);
  double prev = 1.5;
  for (auto& [t, p] : tail.series) {
    CHECK(p >= 0.0);
    CHECK(p <= prev + 1e-15);  // tails decrease in t
    prev = p;
  }

  ExperimentReport dev =
      deviation_check(seq, mu, obs, {8, 16, 32, 64}, 2000, 11, 0.5, 1.0, 8, 64);
  for (auto& [n, p] : dev.series) {
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
  }
}

TEST_CASE("markov_counterexample: |S_n| = n exactly") {
  auto paths = markov_counterexample(200, {1.0, 1.0, 1.0}, 500, 123);
  REQUIRE(paths.size() == 500);
  bool saw_a = false, saw_bc = false;
  for (const auto& p : paths) {
    long expect = p.start == 0 ? -1 : 1;
    for (std::size_t j = 0; j < p.s.size(); ++j)
      CHECK(p.s[j] == expect * static_cast<long>(j + 1));
    (p.start == 0 ? saw_a : saw_bc) = true;
  }
  CHECK(saw_a);
  CHECK(saw_bc);

  // start fixed to A when the initial distribution is concentrated there
  for (const auto& p : markov_counterexample(10, {1.0, 0.0, 0.0}, 50, 5)) CHECK(p.start == 0);

  CHECK_THROWS_AS(markov_counterexample(10, {1.0, 1.0}, 5, 1), std::invalid_argument);
  CHECK_THROWS_AS(markov_counterexample(10, {0.0, 0.0, 0.0}, 5, 1), std::invalid_argument);
}

TEST_CASE("worker_threads honors LSV_THREADS") {
  setenv("LSV_THREADS", "3", 1);
  CHECK(worker_threads() == 3);
  setenv("LSV_THREADS", "bogus", 1);
  CHECK(worker_threads() >= 1);
  unsetenv("LSV_THREADS");
  CHECK(worker_threads() >= 1);
}
