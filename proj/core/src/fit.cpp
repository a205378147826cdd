#include "lsv/fit.hpp"

#include <cmath>
#include <stdexcept>

namespace lsv {

namespace {

LogLogFit least_squares(const std::vector<double>& xs, const std::vector<double>& ys,
                        std::size_t excluded) {
  const std::size_t n = xs.size();
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  double mx = sx / static_cast<double>(n), my = sy / static_cast<double>(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw std::invalid_argument("fit: degenerate abscissae");
  LogLogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  fit.points_used = n;
  fit.points_excluded = excluded;
  fit.defined = true;
  return fit;
}

}  // namespace

LogLogFit slope_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("fit: size mismatch");
  std::vector<double> lx, ly;
  std::size_t excluded = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0)) throw std::invalid_argument("fit: abscissae must be positive");
    if (ys[i] == 0.0) {
      ++excluded;
      continue;
    }
    if (!(ys[i] > 0.0)) throw std::invalid_argument("fit: ordinates must be nonnegative");
    lx.push_back(std::log(xs[i]));
    ly.push_back(std::log(ys[i]));
  }
  if (lx.size() < 3) throw std::invalid_argument("fit: fewer than 3 usable points");
  return least_squares(lx, ly, excluded);
}

LogLogFit slope_fit_or_undefined(const std::vector<double>& xs, const std::vector<double>& ys) {
  try {
    return slope_fit(xs, ys);
  } catch (const std::invalid_argument&) {
    LogLogFit fit;
    fit.defined = false;
    return fit;
  }
}

LogLogFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("fit: size mismatch");
  if (xs.size() < 3) throw std::invalid_argument("fit: fewer than 3 points");
  return least_squares(xs, ys, 0);
}

}  // namespace lsv
