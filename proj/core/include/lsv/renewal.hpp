#ifndef LSV_RENEWAL_HPP
#define LSV_RENEWAL_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "lsv/fit.hpp"
#include "lsv/rng.hpp"
#include "lsv/tail.hpp"

namespace lsv {

// Distributional data for the renewal variable S = X_1 + ... + X_tau:
// tau is geometric(theta) on {1,2,...}; the blocks take values in
// {n0, n0+1, ...} with P(X_1 >= l) = r_hat(l - n0) and
// P(X_j >= l | X_{j-1} = k) = h_hat_k(l - n0), where
// h_hat_k(l) = min(1, c_h * sum_{j=0}^{k} h(j + l)).
struct RenewalSpec {
  double theta;
  int n0;
  TailFunction r_hat;
  TailFunction h;
  double c_h = 1.0;
  int value_cap = 0;  // 0: no truncation (cap = n_max in the DP)

  RenewalSpec(double theta_, int n0_, TailFunction r_hat_, TailFunction h_, double c_h_ = 1.0,
              int value_cap_ = 0);
};

// Tabulated conditional-tail family h_hat_k(l), backed by prefix sums of h.
class BlockTailFamily {
 public:
  BlockTailFamily(const TailFunction& h, double c_h, std::size_t table_size);
  // P(X >= n0 + l | previous block = k); 1 for l <= 0
  double tail(long k, long l) const;
  std::size_t table_size() const { return prefix_.size() - 1; }

 private:
  std::vector<double> prefix_;  // prefix_[m] = sum_{j=1}^m h(j)
  double c_h_;
};

// One draw of S; reproducible given the stream. The family must be built
// from spec.h with spec.c_h; the convenience overload builds one per call
// (use the explicit form in Monte Carlo loops).
long sample_S(const RenewalSpec& spec, const BlockTailFamily& family, rng::Stream& stream);
long sample_S(const RenewalSpec& spec, rng::Stream& stream);

struct DpTails {
  std::vector<double> tail;   // tail[n-1] = P(S >= n), n = 1..n_max
  double residual = 0.0;      // P(S > n_max)
  double overflow_mass = 0.0;  // mass lumped through the cap state; brackets the
                               // tails as [tail - overflow, tail + overflow]
};

// Exact tail law of S by dynamic programming over (partial sum, last block
// value). Exact for n <= n_max when value_cap >= n_max; otherwise block
// values above the cap are lumped into an absorbing overflow state and the
// lumped mass is reported as a bracket.
DpTails exact_tail_dp(const RenewalSpec& spec, int n_max);

struct StabilityReport {
  std::vector<double> statistic;  // per n in [n_lo, n_hi]
  double early_max = 0.0;  // max over the first three quarters of the range
  double late_max = 0.0;   // max over the last quarter
  bool pass = false;       // late_max <= 1.05 * early_max (running max stabilized)
};

// Polynomial first-block tails: running max of n^{beta'} P(S >= n) must
// stabilize across [n_lo, n_hi].
StabilityReport verify_stail(const RenewalSpec& spec, double beta, double beta_prime,
                             int n_lo, int n_hi);

struct StailBReport {
  std::vector<double> required_c;  // per n >= max(n_lo, 2 n0): smallest C making the bound hold
  double fitted_c = 0.0;           // max over the range
  double early_max = 0.0;
  double late_max = 0.0;
  bool pass = false;  // fitted constant stable (late max <= 1.05 * early max)
};

// Summable first-block tails: P(S >= n) <= r(floor(n/2) - n0) + C n^{-beta} sum_j r(j),
// checked for n >= 2 n0 with a fitted stable C.
StailBReport verify_stail_b(const RenewalSpec& spec, double beta, int n_lo, int n_hi);

struct StretchedExpReport {
  LogLogFit fit;  // log P(S >= n) against n^beta
  bool pass = false;
};

// Stretched-exponential tails: log P(S >= n) is linear in n^beta with
// negative slope and r^2 >= 0.98.
StretchedExpReport verify_stail_exp(const RenewalSpec& spec, double beta, int n_lo, int n_hi);

// Block-length sequence for the quadratic-variation functionals:
// P(tau_0 >= l) = min(1, c_tau l^{-beta+1}), P(tau_n >= l) = min(1, c_tau l^{-beta}).
struct TauSequence {
  std::vector<long> taus;
  double beta;
  double c_tau;
};

TauSequence sample_tau_sequence(double beta, double c_tau, std::size_t length,
                                rng::Stream& stream);

// sigma = sum_n (a_{r_{n-1}} + ... + a_{r_n - 1})^2 and
// omega = sum_n (sum_{j>=1} a_{r_n + j - 1} min{tau_n j^{-beta}, j^{-beta+1}})^2,
// with r_{-1} = 0, r_n = tau_0 + ... + tau_n, truncated when blocks pass the
// support of a.
std::pair<double, double> sigma_omega(std::span<const double> a, const TauSequence& taus,
                                      double beta);

struct QvSeries {
  std::vector<std::size_t> lengths;
  std::vector<double> sigma_ratio;  // norm of sigma^{1/2} relative to its target envelope
  std::vector<double> omega_ratio;
  bool sigma_pass = false;  // last-decade max <= 1.1 * overall max
  bool omega_pass = false;
  bool pass() const { return sigma_pass && omega_pass; }
};

// Monte Carlo boundedness check of the quadratic-variation moment bounds for
// a == 1 on increasing lengths. The norm convention depends on the given
// beta: weak-L^beta for beta in (1,2), log-weighted L^2 at beta = 2,
// L^{2(beta-1)} for beta > 2.
QvSeries qv_moment_check(double beta, double c_tau, const std::vector<std::size_t>& lengths,
                         std::size_t draws, std::uint64_t seed);

// LHS = sum_{n in Z} sum_{k} w_k (sum_{j=n-k}^{n+k} a_j)^{2(beta-1)} for the
// given finite w, and RHS base (sum a_n^2)^{beta-1}.
std::pair<double, double> lemma_fun_oracle(std::span<const double> a,
                                           std::span<const double> w, double beta);

// LHS = sum_{n>=1} sum_{k>=1} k^{-3} (a_n + ... + a_{n+k-1})^2 with the k-tail
// beyond the support summed in closed form, and RHS base
// sum a_n^2 (1 + log n). a[i] holds a_{i+1}.
std::pair<double, double> lemma_fun2_oracle(std::span<const double> a);

// sum_{k >= k0} k^{-3}, direct summation plus Euler-Maclaurin remainder.
double zeta3_tail(long k0);

}  // namespace lsv

#endif
