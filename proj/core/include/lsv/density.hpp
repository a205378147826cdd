#ifndef LSV_DENSITY_HPP
#define LSV_DENSITY_HPP

#include <cstddef>
#include <functional>
#include <vector>

#include "lsv/map.hpp"

namespace lsv {

// A density on [0,1] stored as cell averages on a fixed grid. The grid is
// geometric near 0 (resolving the x^{-gamma} blow-up of cone densities) and
// uniform above `split`; 0.5 is always a grid edge so that map branches never
// straddle a cell.
class GridDensity {
 public:
  GridDensity(std::vector<double> edges, std::vector<double> values);

  // Default grid: one cell [0, 1e-12], `geometric_cells` geometric cells up
  // to `split`, uniform cells above. total cells = m_total.
  static std::vector<double> make_edges(std::size_t m_total = 32768,
                                        std::size_t geometric_cells = 600,
                                        double x_min = 1e-12, double split = 0.1);

  static GridDensity uniform(const std::vector<double>& edges);
  // Cell averages from midpoint evaluation; optionally normalized to mass 1.
  static GridDensity from_function(const std::vector<double>& edges,
                                   const std::function<double(double)>& f, bool normalize);

  std::size_t cells() const { return values_.size(); }
  const std::vector<double>& edges() const { return edges_; }
  const std::vector<double>& values() const { return values_; }
  double cell_mass(std::size_t i) const { return values_[i] * (edges_[i + 1] - edges_[i]); }
  double mass() const;

  // mass of [0, x]
  double cdf(double x) const;

  GridDensity& normalize();

  bool same_grid(const GridDensity& other) const;

 private:
  std::vector<double> edges_;
  std::vector<double> values_;
};

// Pushforward of f under one map, by exact interval mass transport: each
// source cell's image interval is intersected with the destination cells and
// the cell mass deposited proportionally to overlap. Mass is conserved by
// construction (the last deposit takes the remainder).
GridDensity transfer_step(const LsvMap& map, const GridDensity& f);

// n-fold pushforward with maps T_1 ... T_n in order.
GridDensity evolve(const ParameterSequence& seq, GridDensity f, std::size_t n);

// Total variation as total mass of the difference: integral |f - g| dx.
double tv_distance(const GridDensity& f, const GridDensity& g);

struct ConeReport {
  bool nonnegative = false;
  bool nonincreasing = false;
  bool weighted_increasing = false;  // x^{gamma*+1} f(x) nondecreasing
  bool pointwise_bound = false;      // f(x) <= a x^{-gamma*} integral(f)
  double worst_nonnegative = 0.0;
  double worst_nonincreasing = 0.0;
  double worst_weighted = 0.0;
  double worst_bound = 0.0;
  bool pass(double tol = 0.0) const {
    return worst_nonnegative <= tol && worst_nonincreasing <= tol && worst_weighted <= tol &&
           worst_bound <= tol;
  }
};

// Membership diagnostics for the cone of decreasing densities with
// x^{gamma*+1} f increasing and f <= a x^{-gamma*} integral(f). Requires
// a > 2^{gamma*} (gamma* + 2).
ConeReport cone_check(const GridDensity& f, double gamma_star, double a);

double cone_parameter_default(double gamma_star);

// Lipschitz seminorm of log f over adjacent cell midpoints inside
// [region_lo, region_hi]; +infinity if f steps between zero and nonzero,
// 0 where f vanishes identically (log 0 - log 0 = 0).
double log_lipschitz(const GridDensity& f, double region_lo, double region_hi);

// Fixed point of the transfer operator by power iteration from the uniform
// density, stopping when the successive L1 change falls below tol.
GridDensity invariant_density(double gamma, double tol, std::size_t grid_cells = 32768,
                              std::size_t max_iterations = 100000);

// Inverse-CDF sampling; u uniform in [0,1).
double sample(const GridDensity& f, double u);

// Precomputed inverse-CDF table for repeated sampling from one density.
class DensitySampler {
 public:
  explicit DensitySampler(const GridDensity& f);
  double operator()(double u) const;

 private:
  std::vector<double> edges_;
  std::vector<double> cum_;  // cum_[i] = mass of [0, edges_[i]], normalized
};

}  // namespace lsv

#endif
