#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "lsv/density.hpp"
#include "lsv/map.hpp"
#include "lsv/rng.hpp"

using namespace lsv;

namespace {
const std::vector<double>& small_edges() {
  static std::vector<double> e = GridDensity::make_edges(4096);
  return e;
}
}  // namespace

TEST_CASE("make_edges: structure") {
  const auto& e = small_edges();
  CHECK(e.size() == 4097);
  CHECK(e.front() == 0.0);
  CHECK(e.back() == 1.0);
  bool has_half = false;
  for (double x : e) {
    if (x == 0.5) has_half = true;
  }
  CHECK(has_half);
  for (std::size_t i = 1; i < e.size(); ++i) CHECK(e[i] > e[i - 1]);
  CHECK(e[1] == doctest::Approx(1e-12).epsilon(1e-12));
}

TEST_CASE("uniform density and cdf") {
  GridDensity f = GridDensity::uniform(small_edges());
  CHECK(f.mass() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(f.cdf(0.25) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(f.cdf(1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.cdf(0.0) == 0.0);
}

TEST_CASE("transfer_step: mass preservation and linear zero") {
  LsvMap m(0.5);
  GridDensity zero(small_edges(), std::vector<double>(4096, 0.0));
  GridDensity z2 = transfer_step(m, zero);
  for (double v : z2.values()) CHECK(v == 0.0);

  GridDensity f = GridDensity::uniform(small_edges());
  GridDensity g = transfer_step(m, f);
  CHECK(std::abs(g.mass() - f.mass()) <= 1e-12);
}

TEST_CASE("transfer_step: mass conserved to 1e-12 per step over many steps") {
  LsvMap m(0.6);
  auto edges = GridDensity::make_edges(1024);
  GridDensity f = GridDensity::from_function(
      edges, [](double x) { return 1.0 + 0.5 * (0.5 - x); }, true);
  double drift = 0.0;
  for (int s = 0; s < 2000; ++s) {
    double before = f.mass();
    f = transfer_step(m, f);
    drift = std::max(drift, std::abs(f.mass() - before));
  }
  CHECK(drift <= 1e-12);
}

TEST_CASE("transfer_step: positivity exact") {
  LsvMap m(0.3);
  rng::Stream s(23, 0);
  std::vector<double> vals(4096);
  double prev = 2.0;
  for (auto& v : vals) {  // random decreasing nonnegative profile
    prev *= (0.999 + 0.001 * s.next_double());
    v = prev;
  }
  GridDensity f(small_edges(), vals);
  GridDensity g = transfer_step(m, f);
  for (double v : g.values()) CHECK(v >= 0.0);
}

TEST_CASE("evolve: identity at n=0, definition at n=1, TV monotone") {
  auto seq = ParameterSequence::constant(0.5, 64, 0.5);
  GridDensity f = GridDensity::uniform(small_edges());
  GridDensity g = GridDensity::from_function(
      small_edges(), [](double x) { return 1.0 + 0.5 * (0.5 - x); }, true);

  GridDensity f0 = evolve(seq, f, 0);
  CHECK(tv_distance(f0, f) == 0.0);
  GridDensity f1 = evolve(seq, f, 1);
  CHECK(tv_distance(f1, transfer_step(seq.map(1), f)) == 0.0);
  CHECK_THROWS_AS(evolve(seq, f, 65), std::out_of_range);

  double prev = tv_distance(f, g);
  GridDensity fe = f, ge = g;
  for (int n = 1; n <= 32; ++n) {
    fe = transfer_step(seq.map(n), fe);
    ge = transfer_step(seq.map(n), ge);
    double tv = tv_distance(fe, ge);
    CHECK(tv <= prev + 1e-13);
    prev = tv;
  }
}

TEST_CASE("tv_distance: pinned values") {
  GridDensity f = GridDensity::uniform(small_edges());
  CHECK(tv_distance(f, f) == 0.0);
  GridDensity g = GridDensity::from_function(
      small_edges(), [](double x) { return x <= 0.5 ? 2.0 : 0.0; }, false);
  CHECK(tv_distance(f, g) == doctest::Approx(1.0).epsilon(1e-9));
  auto other = GridDensity::uniform(GridDensity::make_edges(2048));
  CHECK_THROWS_AS(tv_distance(f, other), std::invalid_argument);
}

TEST_CASE("cone_check: pinned verdicts") {
  GridDensity f = GridDensity::uniform(small_edges());
  ConeReport r = cone_check(f, 0.5, 4.0);
  CHECK(r.pass(0.0));

  GridDensity inc = GridDensity::from_function(
      small_edges(), [](double x) { return x; }, true);
  ConeReport r2 = cone_check(inc, 0.5, 4.0);
  CHECK_FALSE(r2.nonincreasing);

  GridDensity pw = GridDensity::from_function(
      small_edges(), [](double x) { return std::pow(std::max(x, 1e-300), -0.5); }, true);
  ConeReport r3 = cone_check(pw, 0.5, 4.0);
  CHECK(r3.worst_nonincreasing <= 1e-12);
  CHECK(r3.worst_weighted <= 1e-9);
  CHECK(r3.worst_bound <= 1e-12);

  CHECK_THROWS_AS(cone_check(f, 0.5, 3.0), std::invalid_argument);  // a too small
}

TEST_CASE("cone preservation under transfer_step: violations < 1e-6") {
  auto edges = GridDensity::make_edges(32768);
  std::vector<GridDensity> sources;
  sources.push_back(GridDensity::uniform(edges));
  sources.push_back(GridDensity::from_function(
      edges, [](double x) { return 1.0 + 0.5 * (0.5 - x); }, true));
  sources.push_back(GridDensity::from_function(
      edges, [](double x) { return std::pow(std::max(x, 1e-300), -0.5); }, true));
  for (double gamma : {0.25, 0.5}) {  // any gamma <= gamma* = 0.5
    LsvMap m(gamma);
    for (const auto& f : sources) {
      ConeReport before = cone_check(f, 0.5, cone_parameter_default(0.5));
      REQUIRE(before.pass(1e-9));
      ConeReport after = cone_check(transfer_step(m, f), 0.5, cone_parameter_default(0.5));
      CHECK(after.worst_nonnegative < 1e-6);
      CHECK(after.worst_nonincreasing < 1e-6);
      CHECK(after.worst_weighted < 1e-6);
      CHECK(after.worst_bound < 1e-6);
    }
  }
}

TEST_CASE("log_lipschitz: pinned values") {
  GridDensity c = GridDensity::from_function(
      small_edges(), [](double) { return 3.0; }, false);
  CHECK(log_lipschitz(c, 0.2, 0.8) == 0.0);

  GridDensity e2 = GridDensity::from_function(
      small_edges(), [](double x) { return std::exp(2.0 * x); }, false);
  CHECK(log_lipschitz(e2, 0.2, 0.8) == doctest::Approx(2.0).epsilon(1e-3));

  GridDensity z(small_edges(), std::vector<double>(4096, 0.0));
  CHECK(log_lipschitz(z, 0.2, 0.8) == 0.0);

  std::vector<double> vals(4096, 1.0);
  vals[2048] = 0.0;
  GridDensity holed(small_edges(), vals);
  CHECK(std::isinf(log_lipschitz(holed, 0.2, 0.8)));
}

TEST_CASE("invariant_density: fixed point, cone, singularity exponent") {
  GridDensity h = invariant_density(0.5, 1e-6, 4096, 100000);
  CHECK(h.mass() == doctest::Approx(1.0).epsilon(1e-9));
  // stopping rule: one more step moves the density by < 10 tol
  LsvMap m(0.5);
  CHECK(tv_distance(transfer_step(m, h), h) < 10.0 * 1e-6);
  // f(x) x^0.5 bounded near 0 (h ~ x^-gamma)
  const auto& e = h.edges();
  for (std::size_t i = 0; i < h.cells(); ++i) {
    double mid = 0.5 * (e[i] + e[i + 1]);
    if (mid < 1e-6) CHECK(h.values()[i] * std::sqrt(mid) < 10.0);
  }
  ConeReport r = cone_check(h, 0.5, cone_parameter_default(0.5));
  CHECK(r.worst_weighted < 1e-6);
  CHECK(r.worst_nonincreasing < 1e-6);

  // weak intermittency: density bounded above
  GridDensity h2 = invariant_density(0.05, 1e-6, 4096, 100000);
  double top = 0.0;
  for (double v : h2.values()) top = std::max(top, v);
  CHECK(top < 3.0);

  CHECK_THROWS_AS(invariant_density(0.5, 1e-15, 1024, 5), std::runtime_error);
}

TEST_CASE("sample: pinned values and sampler agreement") {
  GridDensity f = GridDensity::uniform(small_edges());
  CHECK(sample(f, 0.25) == doctest::Approx(0.25).epsilon(1e-9));
  GridDensity g = GridDensity::from_function(
      small_edges(), [](double x) { return x <= 0.5 ? 2.0 : 0.0; }, false);
  CHECK(sample(g, 0.5) == doctest::Approx(0.25).epsilon(1e-9));

  DensitySampler s(g);
  rng::Stream st(29, 0);
  for (int i = 0; i < 200; ++i) {
    double u = st.next_double();
    CHECK(s(u) == doctest::Approx(sample(g, u)).epsilon(1e-9));
  }
}

TEST_CASE("sample: empirical CDF matches grid CDF (DKW at 1e6 samples)") {
  GridDensity h = invariant_density(0.5, 1e-6, 4096, 100000);
  DensitySampler s(h);
  rng::Stream st(31, 0);
  const int n = 1000000;
  std::vector<double> pts(n);
  for (auto& p : pts) p = s(st.next_double());
  std::sort(pts.begin(), pts.end());
  // Kolmogorov distance at a grid of probe points
  double worst = 0.0;
  for (double q : {0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99}) {
    auto it = std::upper_bound(pts.begin(), pts.end(), q);
    double emp = static_cast<double>(it - pts.begin()) / n;
    worst = std::max(worst, std::abs(emp - h.cdf(q) / h.mass()));
  }
  CHECK(worst < 0.002);
}
