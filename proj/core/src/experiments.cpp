#include "lsv/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "lsv/rng.hpp"

namespace lsv {

unsigned worker_threads() {
  if (const char* env = std::getenv("LSV_THREADS")) {
    long n = std::atol(env);
    if (n >= 1) return static_cast<unsigned>(n);
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? hc : 1;
}

namespace {

void parallel_blocks(std::size_t blocks, const std::function<void(std::size_t)>& work) {
  unsigned threads = std::min<unsigned>(worker_threads(), static_cast<unsigned>(blocks));
  if (threads <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) work(b);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t b = next.fetch_add(1); b < blocks; b = next.fetch_add(1)) work(b);
    });
  for (auto& th : pool) th.join();
}

}  // namespace

Observable observable_by_name(const std::string& name) {
  if (name == "id") return {"id", [](double x) { return x; }, 1.0};
  if (name == "cos2pi")
    return {"cos2pi", [](double x) { return std::cos(2.0 * std::numbers::pi * x); },
            2.0 * std::numbers::pi};
  if (name == "tent") return {"tent", [](double x) { return std::abs(x - 0.5); }, 1.0};
  throw std::invalid_argument("unknown observable: " + name);
}

ExperimentReport memory_loss_experiment(const ParameterSequence& seq, GridDensity f,
                                        GridDensity g, const std::vector<std::size_t>& n_grid,
                                        double fit_lo, double fit_hi) {
  if (!f.same_grid(g)) throw std::invalid_argument("memory loss: density grid mismatch");
  if (!n_grid.empty() && n_grid.back() > seq.size())
    throw std::out_of_range("memory loss: n_grid exceeds sequence length");
  ExperimentReport rep;
  rep.fit_lo = fit_lo;
  rep.fit_hi = fit_hi;
  std::size_t step = 0;
  for (std::size_t n : n_grid) {
    for (; step < n; ++step) {
      LsvMap map = seq.map(step + 1);
      f = transfer_step(map, f);
      g = transfer_step(map, g);
    }
    rep.series.emplace_back(static_cast<double>(n), tv_distance(f, g));
  }
  std::vector<double> xs, ys;
  for (auto& [n, tv] : rep.series)
    if (n >= fit_lo && n <= fit_hi) {
      xs.push_back(n);
      ys.push_back(tv);
    }
  rep.fit = slope_fit_or_undefined(xs, ys);
  return rep;
}

TrajectoryBatch run_trajectories(const ParameterSequence& seq, const GridDensity& mu,
                                 const ObservableSpec& obs,
                                 const std::vector<std::size_t>& n_grid, std::size_t samples,
                                 std::uint64_t seed) {
  if (n_grid.empty()) throw std::invalid_argument("empty n grid");
  for (std::size_t i = 1; i < n_grid.size(); ++i)
    if (n_grid[i] <= n_grid[i - 1]) throw std::invalid_argument("n grid must be increasing");
  const std::size_t n_max = n_grid.back();
  if (n_max >= 2 && seq.size() < n_max - 1)
    throw std::out_of_range("sequence too short for trajectory length");
  if (obs.kind == ObservableKind::WeightedBirkhoff && obs.weights.size() < n_max)
    throw std::invalid_argument("weights shorter than trajectory length");

  DensitySampler sampler(mu);
  const std::size_t block_size = 4096;
  const std::size_t blocks = (samples + block_size - 1) / block_size;
  const auto& vf = obs.v.f;

  auto step_weight = [&](std::size_t k) {
    return obs.kind == ObservableKind::WeightedBirkhoff ? obs.weights[k] : 1.0;
  };

  // pass 1: per-step empirical means of w_k v(x_k)
  std::vector<std::vector<double>> block_sums(blocks);
  parallel_blocks(blocks, [&](std::size_t b) {
    rng::Stream stream(seed, b);
    std::size_t lo = b * block_size, hi = std::min(samples, lo + block_size);
    std::vector<double> sums(n_max, 0.0);
    for (std::size_t i = lo; i < hi; ++i) {
      double x = sampler(stream.next_double());
      for (std::size_t k = 0; k < n_max; ++k) {
        sums[k] += step_weight(k) * vf(x);
        if (k + 1 < n_max) x = apply(seq.map(k + 1), x);
      }
    }
    block_sums[b] = std::move(sums);
  });
  std::vector<double> mean(n_max, 0.0);
  for (std::size_t b = 0; b < blocks; ++b)  // fixed order: bit-reproducible
    for (std::size_t k = 0; k < n_max; ++k) mean[k] += block_sums[b][k];
  for (auto& m : mean) m /= static_cast<double>(samples);

  // pass 2: replay the same streams, accumulate centered sums and running max
  TrajectoryBatch batch;
  batch.n_grid = n_grid;
  batch.samples = samples;
  batch.s_n.assign(samples * n_grid.size(), 0.0);
  batch.s_star.assign(samples * n_grid.size(), 0.0);
  parallel_blocks(blocks, [&](std::size_t b) {
    rng::Stream stream(seed, b);
    std::size_t lo = b * block_size, hi = std::min(samples, lo + block_size);
    for (std::size_t i = lo; i < hi; ++i) {
      double x = sampler(stream.next_double());
      double s = 0.0, smax = 0.0;
      std::size_t gi = 0;
      for (std::size_t k = 0; k < n_max; ++k) {
        s += step_weight(k) * vf(x) - mean[k];
        smax = std::max(smax, std::abs(s));
        if (k + 1 == n_grid[gi]) {
          batch.s_n[i * n_grid.size() + gi] = s;
          batch.s_star[i * n_grid.size() + gi] = smax;
          ++gi;
        }
        if (k + 1 < n_max) x = apply(seq.map(k + 1), x);
      }
    }
  });
  return batch;
}

MomentsReport moments_experiment(const ParameterSequence& seq, const GridDensity& mu,
                                 const ObservableSpec& obs, const std::vector<double>& p_list,
                                 const std::vector<std::size_t>& n_grid, std::size_t samples,
                                 std::uint64_t seed, double fit_lo, double fit_hi) {
  TrajectoryBatch batch = run_trajectories(seq, mu, obs, n_grid, samples, seed);
  MomentsReport rep;
  rep.seed = seed;
  const bool use_star = obs.kind != ObservableKind::Birkhoff;
  for (double p : p_list) {
    MomentSeries ms;
    ms.p = p;
    for (std::size_t j = 0; j < n_grid.size(); ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < samples; ++i) {
        double v = use_star ? batch.star(i, j) : std::abs(batch.sum(i, j));
        acc += std::pow(v, p);
      }
      ms.series.emplace_back(static_cast<double>(n_grid[j]),
                             acc / static_cast<double>(samples));
    }
    std::vector<double> xs, ys;
    for (auto& [n, m] : ms.series)
      if (n >= fit_lo && n <= fit_hi) {
        xs.push_back(n);
        ys.push_back(m);
      }
    ms.fit = slope_fit_or_undefined(xs, ys);
    rep.moments.push_back(std::move(ms));
  }
  return rep;
}

ExperimentReport tail_experiment(const ParameterSequence& seq, const GridDensity& mu,
                                 const ObservableSpec& obs, std::size_t n,
                                 const std::vector<double>& t_grid, std::size_t samples,
                                 std::uint64_t seed) {
  TrajectoryBatch batch = run_trajectories(seq, mu, obs, {n}, samples, seed);
  std::vector<double> vals(samples);
  for (std::size_t i = 0; i < samples; ++i) vals[i] = batch.star(i, 0);
  std::sort(vals.begin(), vals.end());
  ExperimentReport rep;
  rep.seed = seed;
  for (double t : t_grid) {
    auto it = std::lower_bound(vals.begin(), vals.end(), t);
    double tail = static_cast<double>(vals.end() - it) / static_cast<double>(samples);
    rep.series.emplace_back(t, tail);
  }
  // fit over the central decade of the strictly-inside-(0,1) range
  std::vector<double> xs, ys;
  for (auto& [t, p] : rep.series)
    if (p > 0.0 && p < 1.0) {
      xs.push_back(t);
      ys.push_back(p);
    }
  if (xs.size() >= 3) {
    double lo = std::log10(xs.front()), hi = std::log10(xs.back());
    double mid = 0.5 * (lo + hi);
    double wlo = std::max(lo, mid - 0.5), whi = std::min(hi, mid + 0.5);
    rep.fit_lo = std::pow(10.0, wlo);
    rep.fit_hi = std::pow(10.0, whi);
    std::vector<double> fx, fy;
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (xs[i] >= rep.fit_lo * (1 - 1e-12) && xs[i] <= rep.fit_hi * (1 + 1e-12)) {
        fx.push_back(xs[i]);
        fy.push_back(ys[i]);
      }
    rep.fit = slope_fit_or_undefined(fx, fy);
  }
  return rep;
}

ExperimentReport deviation_check(const ParameterSequence& seq, const GridDensity& mu,
                                 const ObservableSpec& obs,
                                 const std::vector<std::size_t>& n_grid, std::size_t samples,
                                 std::uint64_t seed, double epsilon, double tau_exponent,
                                 double fit_lo, double fit_hi) {
  TrajectoryBatch batch = run_trajectories(seq, mu, obs, n_grid, samples, seed);
  ExperimentReport rep;
  rep.seed = seed;
  rep.fit_lo = fit_lo;
  rep.fit_hi = fit_hi;
  for (std::size_t j = 0; j < n_grid.size(); ++j) {
    double threshold = epsilon * std::pow(static_cast<double>(n_grid[j]), tau_exponent);
    std::size_t count = 0;
    for (std::size_t i = 0; i < samples; ++i)
      if (std::abs(batch.sum(i, j)) >= threshold) ++count;
    rep.series.emplace_back(static_cast<double>(n_grid[j]),
                            static_cast<double>(count) / static_cast<double>(samples));
  }
  std::vector<double> xs, ys;
  for (auto& [n, p] : rep.series)
    if (n >= fit_lo && n <= fit_hi) {
      xs.push_back(n);
      ys.push_back(p);
    }
  rep.fit = slope_fit_or_undefined(xs, ys);
  return rep;
}

std::vector<MarkovPath> markov_counterexample(std::size_t n, const std::vector<double>& initial,
                                              std::size_t paths, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("need n >= 1");
  if (initial.size() != 3) throw std::invalid_argument("initial distribution needs 3 entries");
  double total = initial[0] + initial[1] + initial[2];
  if (!(total > 0.0)) throw std::invalid_argument("initial distribution must have mass");
  std::vector<MarkovPath> out(paths);
  for (std::size_t p = 0; p < paths; ++p) {
    rng::Stream stream(seed, p);
    double u = stream.next_double() * total;
    int g = u < initial[0] ? 0 : (u < initial[0] + initial[1] ? 1 : 2);
    MarkovPath path;
    path.start = g;
    path.s.resize(n);
    long s = 0;
    for (std::size_t j = 0; j < n; ++j) {
      // v_j(A) = (-1)^{j+1}, v_j(B or C) = (-1)^j
      int sign = (j % 2 == 0) ? 1 : -1;
      s += (g == 0) ? -sign : sign;
      path.s[j] = s;
      g = (g == 0) ? (stream.next_double() < 0.5 ? 1 : 2) : 0;
    }
    out[p] = std::move(path);
  }
  return out;
}

}  // namespace lsv
