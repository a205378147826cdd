#include "lsv/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace lsv {

RenewalSpec::RenewalSpec(double theta_, int n0_, TailFunction r_hat_, TailFunction h_,
                         double c_h_, int value_cap_)
    : theta(theta_),
      n0(n0_),
      r_hat(std::move(r_hat_)),
      h(std::move(h_)),
      c_h(c_h_),
      value_cap(value_cap_) {
  if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must be in (0,1]");
  if (n0 < 1) throw std::invalid_argument("n0 must be >= 1");
  if (!(c_h > 0.0)) throw std::invalid_argument("c_h must be positive");
  if (r_hat.value(1) != 1.0) throw std::invalid_argument("normalization requires r_hat(1) = 1");
}

BlockTailFamily::BlockTailFamily(const TailFunction& h, double c_h, std::size_t table_size)
    : c_h_(c_h) {
  prefix_.resize(table_size + 1);
  prefix_[0] = 0.0;
  double c = 0.0;
  for (std::size_t m = 1; m <= table_size; ++m) {
    double y = h.value(static_cast<long>(m)) - c;
    double t = prefix_[m - 1] + y;
    c = (t - prefix_[m - 1]) - y;
    prefix_[m] = t;
  }
}

double BlockTailFamily::tail(long k, long l) const {
  if (l <= 0) return 1.0;
  const long T = static_cast<long>(prefix_.size()) - 1;
  if (l - 1 > T) return 0.0;  // beyond the table the window sum is negligible
  long hi = std::min(l + k, T);
  return std::min(1.0, c_h_ * (prefix_[static_cast<std::size_t>(hi)] -
                               prefix_[static_cast<std::size_t>(l - 1)]));
}

namespace {

// P(X_1 >= x) with X_1 supported on {n0, n0+1, ...}
double first_block_tail(const RenewalSpec& spec, long x) {
  if (x <= spec.n0) return 1.0;
  return std::min(1.0, spec.r_hat.value(x - spec.n0));
}

// smallest x with tail(x+1) <= u, i.e. the inverse-CDF draw
long invert_tail(long n0, double u, const std::function<double(long)>& tail_at) {
  long lo = n0;          // tail_at(lo) = 1 > u
  long hi = n0 + 1;
  while (tail_at(hi) > u) {
    lo = hi;
    hi *= 2;
    if (hi > (1L << 60)) throw std::runtime_error("tail inversion diverged");
  }
  // invariant: tail_at(lo) > u >= tail_at(hi)
  while (hi - lo > 1) {
    long mid = lo + (hi - lo) / 2;
    if (tail_at(mid) > u)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace

long sample_S(const RenewalSpec& spec, const BlockTailFamily& family, rng::Stream& stream) {
  long tau = stream.next_geometric(spec.theta);
  double u = stream.next_open();
  long x = invert_tail(spec.n0, u, [&](long v) { return first_block_tail(spec, v); });
  long s = x;
  for (long j = 2; j <= tau; ++j) {
    long prev = x;
    u = stream.next_open();
    x = invert_tail(spec.n0, u, [&](long v) {
      return v <= spec.n0 ? 1.0 : family.tail(prev, v - spec.n0);
    });
    s += x;
  }
  return s;
}

long sample_S(const RenewalSpec& spec, rng::Stream& stream) {
  BlockTailFamily family(spec.h, spec.c_h, 1u << 16);
  return sample_S(spec, family, stream);
}

DpTails exact_tail_dp(const RenewalSpec& spec, int n_max) {
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  const int cap = spec.value_cap > 0 ? std::min(spec.value_cap, n_max) : n_max;
  const double budget_states = static_cast<double>(n_max) * static_cast<double>(cap);
  if (budget_states > 5e7)
    throw std::runtime_error("exact_tail_dp: state space exceeds configured budget");

  BlockTailFamily family(spec.h, spec.c_h, static_cast<std::size_t>(2 * n_max + 2));
  const double theta = spec.theta;
  const int n0 = spec.n0;

  // W[s][k] = sum_j (1-theta)^{j-1} P(X_1 + ... + X_j = s, min(X_j, cap) = k)
  std::vector<std::vector<double>> W(static_cast<std::size_t>(n_max + 1),
                                     std::vector<double>(static_cast<std::size_t>(cap + 1), 0.0));
  std::vector<double> stopped(static_cast<std::size_t>(n_max + 1), 0.0);
  double escaped = 0.0;        // weighted mass with partial sum beyond n_max
  double overflow_mass = 0.0;  // mass routed through the capped value state

  for (int x = n0; x <= n_max; ++x) {
    double p = first_block_tail(spec, x) - first_block_tail(spec, x + 1);
    if (p > 0.0) {
      W[static_cast<std::size_t>(x)][static_cast<std::size_t>(std::min(x, cap))] += p;
      if (x > cap) overflow_mass += p;
    }
  }
  escaped += first_block_tail(spec, n_max + 1);

  for (int s = n0; s <= n_max; ++s) {
    for (int k = n0; k <= std::min(s, cap); ++k) {
      double w = W[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)];
      if (w == 0.0) continue;
      stopped[static_cast<std::size_t>(s)] += theta * w;
      double cont = (1.0 - theta) * w;
      if (cont == 0.0) continue;
      double prev_tail = 1.0;  // P(X >= n0 | prev = k)
      for (int x = n0; x <= n_max - s; ++x) {
        double t_next = family.tail(k, x + 1 - n0);
        double p = prev_tail - t_next;
        if (p > 0.0) {
          W[static_cast<std::size_t>(s + x)][static_cast<std::size_t>(std::min(x, cap))] +=
              cont * p;
          if (x > cap) overflow_mass += cont * p;
        }
        prev_tail = t_next;
      }
      escaped += cont * prev_tail;
    }
  }

  DpTails out;
  out.tail.resize(static_cast<std::size_t>(n_max));
  double suffix = escaped;
  for (int n = n_max; n >= 1; --n) {
    suffix += stopped[static_cast<std::size_t>(n)];
    out.tail[static_cast<std::size_t>(n - 1)] = std::min(1.0, suffix);
  }
  out.residual = escaped;
  out.overflow_mass = overflow_mass;
  return out;
}

namespace {

struct RangeSplit {
  double early_max = 0.0;
  double late_max = 0.0;
};

RangeSplit split_max(const std::vector<double>& stats) {
  RangeSplit rs;
  std::size_t q3 = stats.size() - stats.size() / 4;
  for (std::size_t i = 0; i < stats.size(); ++i) {
    double v = stats[i];
    if (i < q3)
      rs.early_max = std::max(rs.early_max, v);
    else
      rs.late_max = std::max(rs.late_max, v);
  }
  return rs;
}

// total of a summable tail: tabulated part plus analytic remainder
double tail_total(const TailFunction& r) {
  double s = 0.0;
  long j = 1;
  for (; j <= static_cast<long>(r.length()); ++j) s += r.value(j);
  double last = r.value(static_cast<long>(r.length()));
  switch (r.rule()) {
    case TailFunction::Extrapolation::Zero:
      return s;
    case TailFunction::Extrapolation::Power: {
      double beta = r.param_a();
      if (!(beta > 1.0)) throw std::invalid_argument("tail not summable (power exponent <= 1)");
      // sum_{l > L} v_L (l/L)^-beta ~ v_L * L / (beta - 1), integral remainder
      double L = static_cast<double>(r.length());
      return s + last * (L / (beta - 1.0)) * std::pow(1.0 + 0.5 / L, -beta + 1.0);
    }
    case TailFunction::Extrapolation::StretchedExp:
    default: {
      // sum numerically until negligible
      long l = static_cast<long>(r.length()) + 1;
      while (true) {
        double v = r.value(l);
        s += v;
        if (v < 1e-16 || l > 100000000L) break;
        ++l;
      }
      return s;
    }
  }
}

}  // namespace

StabilityReport verify_stail(const RenewalSpec& spec, double beta, double beta_prime,
                             int n_lo, int n_hi) {
  (void)beta;
  if (n_lo < 1 || n_hi <= n_lo) throw std::invalid_argument("bad n range");
  DpTails dp = exact_tail_dp(spec, n_hi);
  StabilityReport rep;
  rep.statistic.reserve(static_cast<std::size_t>(n_hi - n_lo + 1));
  for (int n = n_lo; n <= n_hi; ++n)
    rep.statistic.push_back(dp.tail[static_cast<std::size_t>(n - 1)] *
                            std::pow(static_cast<double>(n), beta_prime));
  auto rs = split_max(rep.statistic);
  rep.early_max = rs.early_max;
  rep.late_max = rs.late_max;
  rep.pass = rep.late_max <= 1.05 * rep.early_max;
  return rep;
}

StailBReport verify_stail_b(const RenewalSpec& spec, double beta, int n_lo, int n_hi) {
  int start = std::max(n_lo, 2 * spec.n0);  // the bound is asserted only for n >= 2 n0
  if (n_hi <= start) throw std::invalid_argument("bad n range");
  DpTails dp = exact_tail_dp(spec, n_hi);
  double sum_r = tail_total(spec.r_hat);
  StailBReport rep;
  for (int n = start; n <= n_hi; ++n) {
    double base = first_block_tail(spec, n / 2);  // r(floor(n/2) - n0) as a probability
    double envelope = std::pow(static_cast<double>(n), -beta) * sum_r;
    double excess = dp.tail[static_cast<std::size_t>(n - 1)] - base;
    rep.required_c.push_back(std::max(0.0, excess) / envelope);
  }
  auto rs = split_max(rep.required_c);
  rep.early_max = rs.early_max;
  rep.late_max = rs.late_max;
  rep.fitted_c = std::max(rs.early_max, rs.late_max);
  rep.pass = rep.late_max <= 1.05 * rep.early_max;
  return rep;
}

StretchedExpReport verify_stail_exp(const RenewalSpec& spec, double beta, int n_lo, int n_hi) {
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must be in (0,1]");
  DpTails dp = exact_tail_dp(spec, n_hi);
  std::vector<double> xs, ys;
  for (int n = n_lo; n <= n_hi; ++n) {
    double t = dp.tail[static_cast<std::size_t>(n - 1)];
    if (t <= 0.0) continue;
    xs.push_back(std::pow(static_cast<double>(n), beta));
    ys.push_back(std::log(t));
  }
  StretchedExpReport rep;
  rep.fit = linear_fit(xs, ys);
  rep.pass = rep.fit.slope < 0.0 && rep.fit.r2 >= 0.98;
  return rep;
}

namespace {

// tau with exact tail P(tau >= l) = min(1, c l^-b), l >= 1
long draw_power_tau(double c, double b, rng::Stream& stream) {
  double u = stream.next_open();
  auto tail = [&](long l) { return std::min(1.0, c * std::pow(static_cast<double>(l), -b)); };
  if (tail(2) <= u) return 1;
  double guess = std::pow(c / u, 1.0 / b);
  long l = std::max(1L, static_cast<long>(guess));
  while (tail(l + 1) > u) ++l;
  while (l > 1 && tail(l) <= u) --l;
  return l;
}

}  // namespace

TauSequence sample_tau_sequence(double beta, double c_tau, std::size_t length,
                                rng::Stream& stream) {
  if (!(beta > 1.0)) throw std::invalid_argument("beta must be > 1");
  if (!(c_tau > 0.0)) throw std::invalid_argument("c_tau must be positive");
  TauSequence seq;
  seq.beta = beta;
  seq.c_tau = c_tau;
  seq.taus.resize(length);
  if (length == 0) return seq;
  seq.taus[0] = draw_power_tau(c_tau, beta - 1.0, stream);
  for (std::size_t n = 1; n < length; ++n)
    seq.taus[n] = draw_power_tau(c_tau, beta, stream);
  return seq;
}

namespace {

// inner sum of the omega functional for one block:
// sum_{j=1}^{J} a_{r+j-1} j^{-beta} min(tau, j)
double omega_inner(std::span<const double> a, long r, long tau, double beta) {
  const long L = static_cast<long>(a.size());
  double s = 0.0;
  for (long j = 1; r + j - 1 < L; ++j) {
    double aj = a[static_cast<std::size_t>(r + j - 1)];
    if (aj == 0.0) continue;
    double jj = static_cast<double>(j);
    s += aj * std::pow(jj, -beta) * static_cast<double>(std::min(tau, j));
  }
  return s;
}

}  // namespace

std::pair<double, double> sigma_omega(std::span<const double> a, const TauSequence& taus,
                                      double beta) {
  const long L = static_cast<long>(a.size());
  std::vector<double> prefix(static_cast<std::size_t>(L) + 1, 0.0);
  for (long i = 0; i < L; ++i)
    prefix[static_cast<std::size_t>(i + 1)] = prefix[static_cast<std::size_t>(i)] +
                                              a[static_cast<std::size_t>(i)];
  double sigma = 0.0, omega = 0.0;
  long r_prev = 0;
  for (std::size_t n = 0; n < taus.taus.size() && r_prev < L; ++n) {
    long tau = taus.taus[n];
    long r_n = r_prev > L ? r_prev : r_prev + std::min(tau, 2 * L + 1);  // avoid overflow
    double block = prefix[static_cast<std::size_t>(std::min(r_n, L))] -
                   prefix[static_cast<std::size_t>(std::min(r_prev, L))];
    sigma += block * block;
    if (r_n < L) {
      double inner = omega_inner(a, r_n, tau, beta);
      omega += inner * inner;
    }
    r_prev = r_n;
  }
  return {sigma, omega};
}

namespace {

// sigma and omega for a == 1 on [0, N): O(1) per block via prefix sums of
// j^{-beta} and j^{-beta+1}; taus drawn lazily until the blocks pass N.
struct ConstQv {
  std::vector<double> p0;  // p0[J] = sum_{j<=J} j^-beta
  std::vector<double> p1;  // p1[J] = sum_{j<=J} j^{-beta+1}
  double beta;
  long N;

  ConstQv(long n, double beta_) : beta(beta_), N(n) {
    p0.resize(static_cast<std::size_t>(N + 1), 0.0);
    p1.resize(static_cast<std::size_t>(N + 1), 0.0);
    for (long j = 1; j <= N; ++j) {
      double jj = static_cast<double>(j);
      p0[static_cast<std::size_t>(j)] = p0[static_cast<std::size_t>(j - 1)] + std::pow(jj, -beta);
      p1[static_cast<std::size_t>(j)] =
          p1[static_cast<std::size_t>(j - 1)] + std::pow(jj, -beta + 1.0);
    }
  }

  std::pair<double, double> draw(double c_tau, rng::Stream& stream) const {
    double sigma = 0.0, omega = 0.0;
    long r_prev = 0;
    bool first = true;
    while (r_prev < N) {
      long tau = first ? draw_power_tau(c_tau, beta - 1.0, stream)
                       : draw_power_tau(c_tau, beta, stream);
      first = false;
      long r_n = r_prev + std::min(tau, 2 * N + 1);
      double block = static_cast<double>(std::min(r_n, N) - r_prev);
      sigma += block * block;
      if (r_n < N) {
        long J = N - r_n;
        long m = std::min(tau, J);
        double inner = p1[static_cast<std::size_t>(m)] +
                       static_cast<double>(tau) *
                           (p0[static_cast<std::size_t>(J)] - p0[static_cast<std::size_t>(m)]);
        omega += inner * inner;
      }
      r_prev = r_n;
    }
    return {sigma, omega};
  }
};

double weak_norm(std::vector<double> vals, double p) {
  std::sort(vals.begin(), vals.end());
  const std::size_t n = vals.size();
  double best = 0.0;
  double lo = std::max(vals[n / 2], 1e-300), hi = vals[n - 1];
  const int grid = 64;
  for (int i = 0; i <= grid; ++i) {
    double t = lo * std::pow(hi / lo, static_cast<double>(i) / grid) * 0.999999;
    auto it = std::upper_bound(vals.begin(), vals.end(), t);
    double tail = static_cast<double>(vals.end() - it) / static_cast<double>(n);
    if (tail > 0.0) best = std::max(best, t * std::pow(tail, 1.0 / p));
  }
  return best;
}

// L^p moment by median-of-means: the p-th powers are heavy-tailed (the first
// block has tail l^{-beta+1}, so high empirical moments have infinite
// variance) and a plain mean spikes on single rare draws. Contiguous groups
// keep the estimate reproducible for a fixed stream order.
double lp_norm(const std::vector<double>& vals, double p) {
  const std::size_t n = vals.size();
  const std::size_t groups = std::min<std::size_t>(25, std::max<std::size_t>(n, 1));
  std::vector<double> means(groups, 0.0);
  for (std::size_t g = 0; g < groups; ++g) {
    std::size_t lo = g * n / groups, hi = (g + 1) * n / groups;
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += std::pow(vals[i], p);
    means[g] = s / static_cast<double>(std::max<std::size_t>(hi - lo, 1));
  }
  std::nth_element(means.begin(), means.begin() + groups / 2, means.end());
  return std::pow(means[groups / 2], 1.0 / p);
}

}  // namespace

QvSeries qv_moment_check(double beta, double c_tau, const std::vector<std::size_t>& lengths,
                         std::size_t draws, std::uint64_t seed) {
  if (!(beta > 1.0)) throw std::invalid_argument("beta must be > 1");
  QvSeries series;
  series.lengths = lengths;
  for (std::size_t li = 0; li < lengths.size(); ++li) {
    const long N = static_cast<long>(lengths[li]);
    ConstQv qv(N, beta);
    std::vector<double> sig_half(draws), om_half(draws);
    rng::Stream stream(seed, li);
    for (std::size_t d = 0; d < draws; ++d) {
      auto [sg, om] = qv.draw(c_tau, stream);
      sig_half[d] = std::sqrt(sg);
      om_half[d] = std::sqrt(om);
    }
    double rhs_l2 = std::sqrt(static_cast<double>(N));  // (sum a_n^2)^{1/2}
    double rhs_lbeta = std::pow(static_cast<double>(N), 1.0 / beta);
    double sig_norm, sig_rhs, om_norm, om_rhs;
    if (beta > 2.0) {
      sig_norm = lp_norm(sig_half, 2.0 * (beta - 1.0));
      sig_rhs = rhs_l2;
      om_norm = *std::max_element(om_half.begin(), om_half.end());  // a.s. bound
      om_rhs = rhs_l2;
    } else if (beta == 2.0) {
      sig_norm = lp_norm(sig_half, 2.0);
      double s = 0.0;
      for (long n = 0; n < N; ++n) s += 1.0 + std::log(static_cast<double>(n + 1));
      sig_rhs = std::sqrt(s);
      om_norm = lp_norm(om_half, beta);
      om_rhs = rhs_lbeta;
    } else {
      sig_norm = weak_norm(sig_half, beta);
      sig_rhs = rhs_lbeta;
      om_norm = lp_norm(om_half, beta);
      om_rhs = rhs_lbeta;
    }
    series.sigma_ratio.push_back(sig_norm / sig_rhs);
    series.omega_ratio.push_back(om_norm / om_rhs);
  }
  // boundedness proxy: the last decade of lengths must not push the max up
  auto check = [&](const std::vector<double>& ratios) {
    double n_max = static_cast<double>(lengths.back());
    double early = 0.0, late = 0.0;
    for (std::size_t i = 0; i < ratios.size(); ++i) {
      if (static_cast<double>(lengths[i]) > n_max / 10.0)
        late = std::max(late, ratios[i]);
      else
        early = std::max(early, ratios[i]);
    }
    return late <= 1.1 * early;
  };
  series.sigma_pass = check(series.sigma_ratio);
  series.omega_pass = check(series.omega_ratio);
  return series;
}

std::pair<double, double> lemma_fun_oracle(std::span<const double> a,
                                           std::span<const double> w, double beta) {
  if (!(beta > 2.0)) throw std::invalid_argument("lemma requires beta > 2");
  // enforce sum_{k >= n} w_k <= n^{-beta}
  double suffix = 0.0;
  for (std::size_t k = w.size(); k-- > 1;) {
    suffix += w[k];
    if (suffix > std::pow(static_cast<double>(k), -beta) * (1.0 + 1e-12))
      throw std::invalid_argument("weights violate the suffix-sum constraint");
  }
  const long L = static_cast<long>(a.size());
  std::vector<double> prefix(static_cast<std::size_t>(L) + 1, 0.0);
  double sq = 0.0;
  for (long i = 0; i < L; ++i) {
    prefix[static_cast<std::size_t>(i + 1)] =
        prefix[static_cast<std::size_t>(i)] + a[static_cast<std::size_t>(i)];
    sq += a[static_cast<std::size_t>(i)] * a[static_cast<std::size_t>(i)];
  }
  const double expo = 2.0 * (beta - 1.0);
  double lhs = 0.0;
  for (long k = 0; k < static_cast<long>(w.size()); ++k) {
    double wk = w[static_cast<std::size_t>(k)];
    if (wk == 0.0) continue;
    double inner = 0.0;
    for (long n = -k; n <= L - 1 + k; ++n) {
      long lo = std::max(n - k, 0L), hi = std::min(n + k, L - 1);
      if (lo > hi) continue;
      double window = prefix[static_cast<std::size_t>(hi + 1)] -
                      prefix[static_cast<std::size_t>(lo)];
      if (window != 0.0) inner += std::pow(window, expo);
    }
    lhs += wk * inner;
  }
  return {lhs, std::pow(sq, beta - 1.0)};
}

double zeta3_tail(long k0) {
  if (k0 < 1) throw std::invalid_argument("k0 must be >= 1");
  long k1 = std::max(k0, 2000L);
  double s = 0.0;
  for (long k = k1 - 1; k >= k0; --k) s += 1.0 / (static_cast<double>(k) * k * k);
  double K = static_cast<double>(k1);
  // Euler-Maclaurin remainder for sum_{k >= k1} k^-3
  s += 0.5 / (K * K) + 0.5 / (K * K * K) + 0.25 / (K * K * K * K) -
       1.0 / (12.0 * std::pow(K, 6.0));
  return s;
}

std::pair<double, double> lemma_fun2_oracle(std::span<const double> a) {
  const long L = static_cast<long>(a.size());
  double lhs = 0.0, rhs = 0.0;
  // suffix sums: window from n of length k >= L-n+1 is constant
  for (long n = 1; n <= L; ++n) {
    double an = a[static_cast<std::size_t>(n - 1)];
    if (an < 0.0) throw std::invalid_argument("sequence must be nonnegative");
    rhs += an * an * (1.0 + std::log(static_cast<double>(n)));
    double window = 0.0;
    for (long k = 1; k <= L - n; ++k) {
      window += a[static_cast<std::size_t>(n + k - 2)];
      double kk = static_cast<double>(k);
      lhs += window * window / (kk * kk * kk);
    }
    // all remaining windows contain the whole suffix a_n + ... + a_L
    double full = window + a[static_cast<std::size_t>(L - 1)];
    lhs += full * full * zeta3_tail(L - n + 1);
  }
  return {lhs, rhs};
}

}  // namespace lsv
