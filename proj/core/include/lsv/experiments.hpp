#ifndef LSV_EXPERIMENTS_HPP
#define LSV_EXPERIMENTS_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lsv/density.hpp"
#include "lsv/fit.hpp"
#include "lsv/map.hpp"

namespace lsv {

// Lipschitz observables from a small catalog; the constant is recorded so
// experiments can report sup_n ||v_n||.
struct Observable {
  std::string name;
  std::function<double(double)> f;
  double lipschitz = 0.0;
};

// catalog names: "id" (x, Lip 1), "cos2pi" (cos 2 pi x, Lip 2 pi),
// "tent" (dist(x, 1/2), Lip 1)
Observable observable_by_name(const std::string& name);

enum class ObservableKind { Birkhoff, RunningMax, WeightedBirkhoff };

struct ObservableSpec {
  ObservableKind kind = ObservableKind::RunningMax;
  Observable v;
  std::vector<double> weights;  // per-step weights for WeightedBirkhoff
};

// Evolves two densities under the same composition and records their total
// variation distance at each n in n_grid; log-log slope fitted over
// [fit_lo, fit_hi].
ExperimentReport memory_loss_experiment(const ParameterSequence& seq, GridDensity f,
                                        GridDensity g, const std::vector<std::size_t>& n_grid,
                                        double fit_lo, double fit_hi);

// Per-sample Birkhoff statistics: for each n in n_grid, the centered sum
// S_n and the running maximum S_n* = max_{k<=n} |S_k|. Centering subtracts
// the same-sample empirical mean of each step observable (two passes over
// identical streams). Parallel over sample blocks, combined in block order.
struct TrajectoryBatch {
  std::vector<std::size_t> n_grid;
  std::size_t samples = 0;
  // row-major over (sample, grid index)
  std::vector<double> s_n;
  std::vector<double> s_star;
  double sum(std::size_t sample, std::size_t j) const { return s_n[sample * n_grid.size() + j]; }
  double star(std::size_t sample, std::size_t j) const {
    return s_star[sample * n_grid.size() + j];
  }
};

TrajectoryBatch run_trajectories(const ParameterSequence& seq, const GridDensity& mu,
                                 const ObservableSpec& obs,
                                 const std::vector<std::size_t>& n_grid, std::size_t samples,
                                 std::uint64_t seed);

struct MomentSeries {
  double p = 0.0;
  std::vector<std::pair<double, double>> series;  // (n, E (S_n*)^p)
  LogLogFit fit;
};

struct MomentsReport {
  std::vector<MomentSeries> moments;
  std::uint64_t seed = 0;
};

MomentsReport moments_experiment(const ParameterSequence& seq, const GridDensity& mu,
                                 const ObservableSpec& obs, const std::vector<double>& p_list,
                                 const std::vector<std::size_t>& n_grid, std::size_t samples,
                                 std::uint64_t seed, double fit_lo, double fit_hi);

// Empirical tail P(S_n* >= t) at fixed n over t_grid; slope fitted in log t
// over the central decade of the usable (0 < tail < 1) range.
ExperimentReport tail_experiment(const ParameterSequence& seq, const GridDensity& mu,
                                 const ObservableSpec& obs, std::size_t n,
                                 const std::vector<double>& t_grid, std::size_t samples,
                                 std::uint64_t seed);

// Empirical deviation probabilities P(|S_n / n^tau| >= epsilon) against n,
// with a log-log decay fit. tau_exponent = 1 gives large deviations.
ExperimentReport deviation_check(const ParameterSequence& seq, const GridDensity& mu,
                                 const ObservableSpec& obs,
                                 const std::vector<std::size_t>& n_grid, std::size_t samples,
                                 std::uint64_t seed, double epsilon, double tau_exponent,
                                 double fit_lo, double fit_hi);

// The 2-periodic 3-state chain with alternating observable: a non-mixing
// system whose Birkhoff sums satisfy |S_n| = n exactly.
struct MarkovPath {
  int start = 0;  // 0 = A, 1 = B, 2 = C
  std::vector<long> s;  // S_1 .. S_n
};

std::vector<MarkovPath> markov_counterexample(std::size_t n, const std::vector<double>& initial,
                                              std::size_t paths, std::uint64_t seed);

// thread count: LSV_THREADS if set, else hardware concurrency
unsigned worker_threads();

}  // namespace lsv

#endif
