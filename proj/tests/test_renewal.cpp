#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "lsv/renewal.hpp"
#include "lsv/rng.hpp"
#include "lsv/tail.hpp"

using namespace lsv;

namespace {
RenewalSpec deterministic_spec(double theta) {
  // X_1 = n0 + 1 = 2 surely, later blocks = n0 = 1 surely: S = tau + 1.
  TailFunction r_hat({1.0, 0.0}, TailFunction::Extrapolation::Zero);
  return RenewalSpec(theta, 1, r_hat, TailFunction::zero());
}
}  // namespace

TEST_CASE("RenewalSpec validation") {
  TailFunction r = TailFunction::power(2.0, 100);
  TailFunction h = TailFunction::power(3.0, 100);
  CHECK_THROWS_AS(RenewalSpec(0.0, 1, r, h), std::invalid_argument);
  CHECK_THROWS_AS(RenewalSpec(1.5, 1, r, h), std::invalid_argument);
  CHECK_THROWS_AS(RenewalSpec(0.5, 0, r, h), std::invalid_argument);
  CHECK_THROWS_AS(RenewalSpec(0.5, 1, r, h, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(RenewalSpec(0.5, 1, TailFunction::zero(), h), std::invalid_argument);
}

TEST_CASE("BlockTailFamily matches direct window sums") {
  TailFunction h = TailFunction::power(3.0, 200);
  double c_h = 0.7;
  BlockTailFamily fam(h, c_h, 500);
  for (long k : {0L, 1L, 5L, 50L}) {
    double prev = 1.0;
    for (long l = -1; l <= 60; ++l) {
      double direct = 1.0;
      if (l >= 1) {
        double s = 0.0;
        for (long j = 0; j <= k; ++j) s += h.value(j + l);
        direct = std::min(1.0, c_h * s);
      }
      double got = fam.tail(k, l);
      CHECK(got == doctest::Approx(direct).epsilon(1e-12));
      CHECK(got <= prev + 1e-15);  // nonincreasing in l
      prev = got;
    }
  }
}

TEST_CASE("exact_tail_dp: deterministic blocks give a shifted geometric law") {
  RenewalSpec spec = deterministic_spec(0.5);
  DpTails dp = exact_tail_dp(spec, 20);
  CHECK(dp.overflow_mass == 0.0);
  CHECK(dp.tail[0] == 1.0);
  CHECK(dp.tail[1] == 1.0);  // S = tau + 1 >= 2
  for (int n = 2; n <= 20; ++n)
    CHECK(dp.tail[static_cast<std::size_t>(n - 1)] ==
          doctest::Approx(std::pow(2.0, -(n - 2))).epsilon(1e-14));
}

TEST_CASE("exact_tail_dp: P(S >= 1) = 1, nonincreasing, cap bracket") {
  RenewalSpec spec(0.3, 1, TailFunction::power(2.0, 400), TailFunction::power(3.0, 400));
  DpTails dp = exact_tail_dp(spec, 300);
  CHECK(dp.tail[0] == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t i = 1; i < dp.tail.size(); ++i) CHECK(dp.tail[i] <= dp.tail[i - 1] + 1e-15);

  RenewalSpec capped(0.3, 1, TailFunction::power(2.0, 400), TailFunction::power(3.0, 400), 1.0,
                     64);
  DpTails dc = exact_tail_dp(capped, 300);
  CHECK(dc.overflow_mass > 0.0);
  for (std::size_t i = 0; i < dp.tail.size(); ++i) {
    CHECK(dp.tail[i] >= dc.tail[i] - dc.overflow_mass - 1e-12);
    CHECK(dp.tail[i] <= dc.tail[i] + dc.overflow_mass + 1e-12);
  }
}

TEST_CASE("sample_S: deterministic limits and reproducibility") {
  RenewalSpec one = deterministic_spec(1.0);  // tau = 1, S = X_1 = 2
  rng::Stream s(7, 0);
  for (int i = 0; i < 50; ++i) CHECK(sample_S(one, s) == 2);

  RenewalSpec spec(0.3, 1, TailFunction::power(2.0, 400), TailFunction::power(3.0, 400));
  BlockTailFamily fam(spec.h, spec.c_h, 1u << 16);
  rng::Stream a(11, 3), b(11, 3), c(12, 3);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 200; ++i) {
    long va = sample_S(spec, fam, a);
    if (va != sample_S(spec, fam, b)) all_equal = false;
    if (va != sample_S(spec, fam, c)) any_diff = true;
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("sample_S agrees with exact_tail_dp within Monte Carlo error") {
  RenewalSpec spec(0.4, 2, TailFunction::power(1.7, 2000), TailFunction::power(2.5, 2000));
  const int n_max = 60;
  DpTails dp = exact_tail_dp(spec, n_max);
  const std::size_t draws = 200000;
  BlockTailFamily fam(spec.h, spec.c_h, 1u << 16);
  std::vector<std::size_t> count(n_max + 1, 0);
  rng::Stream stream(2024, 0);
  for (std::size_t d = 0; d < draws; ++d) {
    long s = sample_S(spec, fam, stream);
    if (s > n_max) s = n_max;  // tail counts below already cover it
    for (long n = 1; n <= s && n <= n_max; ++n) ++count[static_cast<std::size_t>(n)];
  }
  for (int n = 1; n <= n_max; ++n) {
    double emp = static_cast<double>(count[static_cast<std::size_t>(n)]) / draws;
    double p = dp.tail[static_cast<std::size_t>(n - 1)];
    double se = std::sqrt(std::max(p * (1.0 - p), 1e-12) / draws);
    CHECK(std::abs(emp - p) <= 5.0 * se + dp.overflow_mass);
  }
}

TEST_CASE("verify_stail: polynomial tails stabilize") {
  RenewalSpec spec(0.3, 1, TailFunction::power(2.0, 4000), TailFunction::power(3.0, 4000));
  StabilityReport rep = verify_stail(spec, 3.0, 2.0, 10, 2000);
  CHECK(rep.pass);
  CHECK(rep.late_max <= 1.05 * rep.early_max);

  RenewalSpec equal(0.3, 1, TailFunction::power(3.0, 4000), TailFunction::power(3.0, 4000));
  CHECK(verify_stail(equal, 3.0, 3.0, 10, 2000).pass);

  RenewalSpec light(0.3, 1, TailFunction::power(0.5, 4000), TailFunction::power(3.0, 4000));
  CHECK(verify_stail(light, 3.0, 0.5, 10, 2000).pass);

  CHECK_THROWS_AS(verify_stail(spec, 3.0, 2.0, 100, 100), std::invalid_argument);
}

TEST_CASE("verify_stail_b: summable first-block tails") {
  RenewalSpec spec(0.3, 1, TailFunction::power(2.0, 4000), TailFunction::power(3.0, 4000));
  StailBReport rep = verify_stail_b(spec, 3.0, 10, 2000);
  CHECK(rep.pass);
  CHECK(rep.fitted_c > 0.0);
  CHECK(std::isfinite(rep.fitted_c));
}

TEST_CASE("verify_stail_exp: stretched-exponential tails") {
  // scale e^c anchors r_hat(1) = 1 (the spec's normalization)
  TailFunction r = TailFunction::stretched_exp(0.5, 0.5, 3000, std::exp(0.5));
  TailFunction h = TailFunction::stretched_exp(0.5, 0.5, 3000, std::exp(0.5));
  RenewalSpec spec(0.4, 1, r, h);
  StretchedExpReport rep = verify_stail_exp(spec, 0.5, 5, 400);
  CHECK(rep.pass);
  CHECK(rep.fit.slope < 0.0);
  CHECK(rep.fit.r2 >= 0.98);

  TailFunction re = TailFunction::stretched_exp(0.5, 1.0, 3000, std::exp(0.5));
  RenewalSpec pure(0.4, 1, re, re);
  StretchedExpReport rp = verify_stail_exp(pure, 1.0, 5, 200);
  CHECK(rp.pass);
  CHECK_THROWS_AS(verify_stail_exp(spec, 1.5, 5, 400), std::invalid_argument);
}

TEST_CASE("sample_tau_sequence: degenerate and empirical tails") {
  rng::Stream s(400, 0);
  TauSequence tiny = sample_tau_sequence(2.5, 1e-12, 1000, s);
  for (long t : tiny.taus) CHECK(t == 1);

  CHECK_THROWS_AS(sample_tau_sequence(1.0, 1.0, 10, s), std::invalid_argument);
  CHECK_THROWS_AS(sample_tau_sequence(2.0, 0.0, 10, s), std::invalid_argument);

  // empirical tail of tau_1: P(tau >= l) = min(1, l^-3)
  rng::Stream s2(401, 0);
  const std::size_t draws = 2000000;
  TauSequence big = sample_tau_sequence(3.0, 1.0, draws + 1, s2);
  std::array<long, 3> probes = {5, 10, 20};
  for (long l : probes) {
    std::size_t cnt = 0;
    for (std::size_t i = 1; i <= draws; ++i)
      if (big.taus[i] >= l) ++cnt;
    double emp = static_cast<double>(cnt) / draws;
    double p = std::pow(static_cast<double>(l), -3.0);
    double se = std::sqrt(p * (1.0 - p) / draws);
    CHECK(std::abs(emp - p) <= std::max(4.0 * se, 0.05 * p));
  }

  // tau_0 tail l^{-2} dominates tau_1 tail l^{-3}
  rng::Stream s3(402, 0);
  std::size_t c0 = 0, c1 = 0;
  const int reps = 20000;
  for (int i = 0; i < reps; ++i) {
    TauSequence t = sample_tau_sequence(3.0, 1.0, 2, s3);
    if (t.taus[0] >= 3) ++c0;
    if (t.taus[1] >= 3) ++c1;
  }
  CHECK(static_cast<double>(c0) / reps > static_cast<double>(c1) / reps);
}

TEST_CASE("sigma_omega: pinned values") {
  double beta = 2.5;
  // unit blocks: sigma = sum a_n^2 exactly
  std::vector<double> a = {0.3, 1.0, 0.7, 0.1, 2.0};
  TauSequence unit{std::vector<long>(10, 1), beta, 1.0};
  auto [sg, om] = sigma_omega(a, unit, beta);
  double sq = 0.0;
  for (double x : a) sq += x * x;
  CHECK(sg == doctest::Approx(sq).epsilon(1e-15));
  CHECK(om >= 0.0);

  // single spike covered by one long block
  std::vector<double> spike = {1.0, 0.0, 0.0, 0.0, 0.0};
  TauSequence tau5{std::vector<long>{5}, beta, 1.0};
  auto [sgs, oms] = sigma_omega(spike, tau5, beta);
  CHECK(sgs == 1.0);
  CHECK(oms == 0.0);  // block consumed the whole support

  // crude bound sigma <= (sum a)^2 for random inputs
  rng::Stream s(77, 0);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<double> b(50);
    double total = 0.0;
    for (auto& x : b) {
      x = s.next_double();
      total += x;
    }
    TauSequence taus = sample_tau_sequence(2.2, 1.0, 80, s);
    auto [sg2, om2] = sigma_omega(b, taus, 2.2);
    CHECK(sg2 >= 0.0);
    CHECK(om2 >= 0.0);
    CHECK(sg2 <= total * total + 1e-12);
  }
}

TEST_CASE("qv_moment_check: finite ratios and determinism") {
  std::vector<std::size_t> lengths = {16, 32, 64, 128, 256};
  for (double beta : {1.5, 2.0, 3.0}) {
    QvSeries a = qv_moment_check(beta, 1.0, lengths, 300, 99);
    QvSeries b = qv_moment_check(beta, 1.0, lengths, 300, 99);
    REQUIRE(a.sigma_ratio.size() == lengths.size());
    for (std::size_t i = 0; i < lengths.size(); ++i) {
      CHECK(std::isfinite(a.sigma_ratio[i]));
      CHECK(a.sigma_ratio[i] > 0.0);
      CHECK(std::isfinite(a.omega_ratio[i]));
      CHECK(a.sigma_ratio[i] == b.sigma_ratio[i]);
      CHECK(a.omega_ratio[i] == b.omega_ratio[i]);
    }
  }
  CHECK_THROWS_AS(qv_moment_check(1.0, 1.0, lengths, 10, 1), std::invalid_argument);
}

TEST_CASE("lemma_fun_oracle: pinned values") {
  double beta = 3.0;
  std::vector<double> w = {1.0};
  for (long k = 1; k <= 40; ++k) w.push_back(0.4 * std::pow(static_cast<double>(k), -4.0));

  std::vector<double> zero(5, 0.0);
  auto [lz, rz] = lemma_fun_oracle(zero, w, beta);
  CHECK(lz == 0.0);
  CHECK(rz == 0.0);

  std::vector<double> spike = {1.0};
  auto [ls, rs] = lemma_fun_oracle(spike, w, beta);
  double expect = w[0];
  for (long k = 1; k <= 40; ++k)
    expect += w[static_cast<std::size_t>(k)] * (2.0 * k + 1.0);
  CHECK(ls == doctest::Approx(expect).epsilon(1e-13));
  CHECK(rs == 1.0);

  // homogeneity: ratio invariant under scaling
  rng::Stream s(55, 0);
  std::vector<double> a(20);
  for (auto& x : a) x = s.next_double();
  auto [l1, r1] = lemma_fun_oracle(a, w, beta);
  std::vector<double> a3 = a;
  for (auto& x : a3) x *= 3.0;
  auto [l3, r3] = lemma_fun_oracle(a3, w, beta);
  CHECK(l3 / r3 == doctest::Approx(l1 / r1).epsilon(1e-12));

  std::vector<double> bad_w = {1.0, 2.0};
  CHECK_THROWS_AS(lemma_fun_oracle(a, bad_w, beta), std::invalid_argument);
  CHECK_THROWS_AS(lemma_fun_oracle(a, w, 2.0), std::invalid_argument);
}

TEST_CASE("lemma_fun2_oracle: pinned values") {
  std::vector<double> zero(4, 0.0);
  auto [lz, rz] = lemma_fun2_oracle(zero);
  CHECK(lz == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(rz == 0.0);

  std::vector<double> spike = {1.0};
  auto [ls, rs] = lemma_fun2_oracle(spike);
  CHECK(ls == doctest::Approx(1.2020569031595943).epsilon(1e-9));
  CHECK(rs == 1.0);

  // scale invariance of the ratio
  rng::Stream s(66, 0);
  std::vector<double> a(30);
  for (auto& x : a) x = s.next_double();
  auto [l1, r1] = lemma_fun2_oracle(a);
  std::vector<double> a2 = a;
  for (auto& x : a2) x *= 7.0;
  auto [l2, r2] = lemma_fun2_oracle(a2);
  CHECK(l2 / r2 == doctest::Approx(l1 / r1).epsilon(1e-12));

  // ratio bounded across lengths 10..10^4 (running-max rule)
  double overall = 0.0, early = 0.0;
  for (std::size_t n : {10u, 100u, 1000u, 10000u}) {
    std::vector<double> ones(n, 1.0);
    auto [lh, rh] = lemma_fun2_oracle(ones);
    double ratio = lh / rh;
    overall = std::max(overall, ratio);
    if (n <= 1000u) early = std::max(early, ratio);
  }
  CHECK(overall <= 1.1 * early);

  std::vector<double> neg = {1.0, -0.5};
  CHECK_THROWS_AS(lemma_fun2_oracle(neg), std::invalid_argument);
}

TEST_CASE("zeta3_tail: pinned values") {
  CHECK(zeta3_tail(1) == doctest::Approx(1.2020569031595943).epsilon(1e-12));
  CHECK(zeta3_tail(2) == doctest::Approx(1.2020569031595943 - 1.0).epsilon(1e-10));
  CHECK_THROWS_AS(zeta3_tail(0), std::invalid_argument);
}
