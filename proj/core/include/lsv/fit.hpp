#ifndef LSV_FIT_HPP
#define LSV_FIT_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace lsv {

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points_used = 0;
  std::size_t points_excluded = 0;  // y == 0 entries dropped
  bool defined = false;             // false when fewer than 3 usable points
};

// Least squares on (log x, log y); points with y = 0 are excluded and
// counted. Throws if fewer than 3 usable points remain.
LogLogFit slope_fit(const std::vector<double>& xs, const std::vector<double>& ys);

// As slope_fit, but flags the fit undefined instead of throwing.
LogLogFit slope_fit_or_undefined(const std::vector<double>& xs, const std::vector<double>& ys);

// Plain least squares on (x, y) (used for stretched-exponential tails where
// x = n^beta and y = log P).
LogLogFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys);

struct ExperimentReport {
  std::vector<std::pair<double, double>> series;  // (n, statistic)
  LogLogFit fit;
  double fit_lo = 0.0, fit_hi = 0.0;  // fit window in n
  std::string config_hash;
  std::uint64_t seed = 0;
};

}  // namespace lsv

#endif
