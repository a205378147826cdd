#include "lsv/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

namespace lsv {

namespace {

double kahan_sum(const std::vector<double>& xs) {
  double s = 0.0, c = 0.0;
  for (double x : xs) {
    double y = x - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

}  // namespace

GridDensity::GridDensity(std::vector<double> edges, std::vector<double> values)
    : edges_(std::move(edges)), values_(std::move(values)) {
  if (edges_.size() < 2 || values_.size() + 1 != edges_.size())
    throw std::invalid_argument("grid: need M+1 edges for M cells");
  if (edges_.front() != 0.0 || edges_.back() != 1.0)
    throw std::invalid_argument("grid must span [0,1]");
  for (std::size_t i = 0; i + 1 < edges_.size(); ++i)
    if (!(edges_[i] < edges_[i + 1]))
      throw std::invalid_argument("grid edges must be strictly increasing");
}

std::vector<double> GridDensity::make_edges(std::size_t m_total, std::size_t geometric_cells,
                                            double x_min, double split) {
  if (m_total < geometric_cells + 11) throw std::invalid_argument("grid too small");
  std::size_t uniform_cells = m_total - geometric_cells - 1;
  std::vector<double> edges;
  edges.reserve(m_total + 1);
  edges.push_back(0.0);
  double ratio = std::pow(split / x_min, 1.0 / static_cast<double>(geometric_cells));
  double e = x_min;
  edges.push_back(e);
  for (std::size_t i = 1; i < geometric_cells; ++i) {
    e *= ratio;
    edges.push_back(e);
  }
  edges.push_back(split);
  for (std::size_t i = 1; i < uniform_cells; ++i)
    edges.push_back(split + (1.0 - split) * static_cast<double>(i) /
                                static_cast<double>(uniform_cells));
  edges.push_back(1.0);
  // snap the nearest edge to 1/2 exactly so branches align with cells
  auto it = std::min_element(edges.begin(), edges.end(), [](double a, double b) {
    return std::abs(a - 0.5) < std::abs(b - 0.5);
  });
  *it = 0.5;
  return edges;
}

GridDensity GridDensity::uniform(const std::vector<double>& edges) {
  return GridDensity(edges, std::vector<double>(edges.size() - 1, 1.0));
}

GridDensity GridDensity::from_function(const std::vector<double>& edges,
                                       const std::function<double(double)>& f,
                                       bool normalize) {
  std::vector<double> values(edges.size() - 1);
  for (std::size_t i = 0; i < values.size(); ++i) {
    double v = f(0.5 * (edges[i] + edges[i + 1]));
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("density function must be finite and nonnegative");
    values[i] = v;
  }
  GridDensity g(edges, std::move(values));
  if (normalize) g.normalize();
  return g;
}

double GridDensity::mass() const {
  std::vector<double> masses(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) masses[i] = cell_mass(i);
  return kahan_sum(masses);
}

double GridDensity::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return mass();
  double s = 0.0, c = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    double hi = std::min(x, edges_[i + 1]);
    double w = hi - edges_[i];
    if (w <= 0.0) break;
    double y = values_[i] * w - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
    if (edges_[i + 1] >= x) break;
  }
  return s;
}

GridDensity& GridDensity::normalize() {
  double m = mass();
  if (!(m > 0.0)) throw std::invalid_argument("cannot normalize zero density");
  for (double& v : values_) v /= m;
  return *this;
}

bool GridDensity::same_grid(const GridDensity& other) const {
  return edges_ == other.edges_;
}

namespace {

// Normalized within-cell profile: mass fraction of the source cell carried
// by [0, t] in local coordinates. The profile is the limited parabola with
// the cell's average and interpolated edge values (PPM reconstruction), so
// smooth densities are transported without the staircase a flat profile
// would imprint wherever a wide source cell feeds narrow destination cells.
struct CellProfile {
  double a1 = 1.0, a2 = 0.0, a3 = 0.0;
  double fraction(double t) const {
    return a1 * t + 0.5 * a2 * t * t + a3 * t * t * (0.5 - t / 3.0);
  }
};

CellProfile make_profile(double v_lo, double v_hi, double avg) {
  CellProfile p;  // flat by default (also covers avg == 0)
  if (!(avg > 0.0)) return p;
  // limiter: keep the parabola monotone between its edge values and preserve
  // the cell average (edge values are pulled in where the data is rough)
  if ((v_hi - avg) * (avg - v_lo) <= 0.0) {
    v_lo = v_hi = avg;
  } else {
    double d = v_hi - v_lo;
    double p6 = 6.0 * (avg - 0.5 * (v_lo + v_hi));
    if (d * p6 > d * d) v_lo = 3.0 * avg - 2.0 * v_hi;
    if (d * p6 < -d * d) v_hi = 3.0 * avg - 2.0 * v_lo;
  }
  if (v_lo < 0.0 || v_hi < 0.0) return p;  // rough data: keep the flat profile
  double d = v_hi - v_lo;
  p.a1 = v_lo / avg;
  p.a2 = d / avg;
  p.a3 = 6.0 * (avg - 0.5 * (v_lo + v_hi)) / avg;
  return p;
}

// Solve T(x) = e on the left branch within [lo, hi] (where T(lo) <= e <= T(hi)),
// Newton from a warm-start guess with a bisection bracket as safety net.
double left_preimage(const LsvMap& map, double e, double lo, double hi, double guess) {
  double x = std::clamp(guess, lo, hi);
  for (int it = 0; it < 80; ++it) {
    double fx = apply(map, x) - e;
    if (fx > 0.0)
      hi = x;
    else
      lo = x;
    double nx = x - fx / derivative(map, x);
    if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
    if (std::abs(nx - x) <= 1e-17 + 1e-16 * x) return nx;
    x = nx;
  }
  return x;
}

// Density values interpolated to the cell edges (one-sided at the ends).
std::vector<double> edge_values(const std::vector<double>& edges,
                                const std::vector<double>& vals) {
  const std::size_t M = vals.size();
  std::vector<double> v(M + 1);
  v[0] = vals[0];
  v[M] = vals[M - 1];
  for (std::size_t i = 1; i < M; ++i) {
    double m0 = 0.5 * (edges[i - 1] + edges[i]);
    double m1 = 0.5 * (edges[i] + edges[i + 1]);
    double t = (edges[i] - m0) / (m1 - m0);
    v[i] = vals[i - 1] + t * (vals[i] - vals[i - 1]);
  }
  return v;
}

// The transport geometry depends only on (map, grid): for each source cell,
// the destination cells its image overlaps and the source-local coordinate
// of each interior destination edge's preimage. Precomputed once and reused,
// so iterating the same map (power iteration, constant sequences) pays for
// the Newton solves only once.
struct TransferPlan {
  double gamma;
  std::vector<double> edges;         // key (grids are value-compared)
  std::vector<std::size_t> seg_off;  // per source cell, offset into cuts (size M+1)
  std::vector<std::size_t> cut_dest;
  std::vector<double> cut_t;
  std::vector<std::size_t> final_dest;  // per source cell, the remainder cell
};

// Record the destination cells of the image [y_lo, y_hi], walking the pointer
// j forward; cut(e) gives the source-local coordinate of the preimage of
// destination edge e. Mirrors the deposit walk below.
template <class CutFn>
void plan_deposit(const std::vector<double>& edges, std::size_t M, TransferPlan& plan,
                  std::size_t& j, double y_lo, double y_hi, CutFn cut) {
  while (j + 1 < M && edges[j + 1] <= y_lo) ++j;
  if (y_hi <= y_lo) {  // degenerate image (can happen by rounding near 0)
    plan.final_dest.push_back(j);
    return;
  }
  for (std::size_t jj = j; jj < M; ++jj) {
    if (jj + 1 == M || edges[jj + 1] >= y_hi) {
      plan.final_dest.push_back(jj);
      return;
    }
    plan.cut_dest.push_back(jj);
    plan.cut_t.push_back(cut(edges[jj + 1]));
  }
}

std::shared_ptr<const TransferPlan> build_plan(const LsvMap& map,
                                               const std::vector<double>& edges) {
  const std::size_t M = edges.size() - 1;
  auto plan = std::make_shared<TransferPlan>();
  plan->gamma = map.gamma;
  plan->edges = edges;
  plan->seg_off.reserve(M + 1);
  plan->final_dest.reserve(M);

  // cell index where the right branch starts (0.5 is a grid edge)
  std::size_t i_half = M;
  for (std::size_t i = 0; i <= M; ++i)
    if (edges[i] == 0.5) {
      i_half = i;
      break;
    }
  if (i_half == M && edges[M] != 0.5)
    throw std::invalid_argument("grid must contain 0.5 as an edge");

  // left branch: strictly increasing image, destination edges cut at their
  // preimages (Newton, warm-started along the sweep within each cell)
  std::size_t j = 0;
  double y_prev = 0.0;
  for (std::size_t i = 0; i < i_half; ++i) {
    double a = edges[i], b = edges[i + 1];
    double y_hi = apply(map, b);
    double guess = a;
    plan->seg_off.push_back(plan->cut_dest.size());
    plan_deposit(edges, M, *plan, j, y_prev, y_hi, [&](double e) {
      double x = left_preimage(map, e, a, b, guess);
      guess = x;
      return b > a ? (x - a) / (b - a) : 1.0;
    });
    y_prev = y_hi;
  }
  // right branch: affine 2x-1, preimage fractions are plain proportions
  j = 0;
  y_prev = 0.0;
  for (std::size_t i = i_half; i < M; ++i) {
    double y_lo = y_prev;
    double y_hi = 2.0 * edges[i + 1] - 1.0;
    plan->seg_off.push_back(plan->cut_dest.size());
    plan_deposit(edges, M, *plan, j, y_lo, y_hi,
                 [&](double e) { return (e - y_lo) / (y_hi - y_lo); });
    y_prev = y_hi;
  }
  plan->seg_off.push_back(plan->cut_dest.size());
  return plan;
}

std::shared_ptr<const TransferPlan> plan_for(const LsvMap& map,
                                             const std::vector<double>& edges) {
  thread_local std::shared_ptr<const TransferPlan> cached;
  if (cached && cached->gamma == map.gamma && cached->edges == edges) return cached;
  cached = build_plan(map, edges);
  return cached;
}

}  // namespace

GridDensity transfer_step(const LsvMap& map, const GridDensity& f) {
  const auto& edges = f.edges();
  const std::size_t M = f.cells();
  auto plan = plan_for(map, edges);

  std::vector<double> v_edge = edge_values(edges, f.values());
  std::vector<double> out_mass(M, 0.0);

  // Fractions telescope so each cell's mass is conserved exactly: the final
  // deposit takes the remainder.
  for (std::size_t i = 0; i < M; ++i) {
    double m = f.cell_mass(i);
    if (m == 0.0) continue;
    CellProfile profile = make_profile(v_edge[i], v_edge[i + 1], f.values()[i]);
    double prev = 0.0;
    double deposited = 0.0;
    for (std::size_t s = plan->seg_off[i]; s < plan->seg_off[i + 1]; ++s) {
      double q = std::clamp(profile.fraction(plan->cut_t[s]), prev, 1.0);
      double d = m * (q - prev);
      out_mass[plan->cut_dest[s]] += d;
      deposited += d;
      prev = q;
    }
    out_mass[plan->final_dest[i]] += m - deposited;
  }

  std::vector<double> values(M);
  for (std::size_t i = 0; i < M; ++i) values[i] = out_mass[i] / (edges[i + 1] - edges[i]);
  return GridDensity(edges, std::move(values));
}

GridDensity evolve(const ParameterSequence& seq, GridDensity f, std::size_t n) {
  if (n > seq.size()) throw std::out_of_range("evolution length exceeds sequence length");
  for (std::size_t k = 1; k <= n; ++k) f = transfer_step(seq.map(k), f);
  return f;
}

double tv_distance(const GridDensity& f, const GridDensity& g) {
  if (!f.same_grid(g)) throw std::invalid_argument("tv_distance: grid mismatch");
  std::vector<double> diff(f.cells());
  for (std::size_t i = 0; i < f.cells(); ++i)
    diff[i] = std::abs(f.cell_mass(i) - g.cell_mass(i));
  return kahan_sum(diff);
}

double cone_parameter_default(double gamma_star) {
  return std::pow(2.0, gamma_star) * (gamma_star + 2.0) + 1.0;
}

ConeReport cone_check(const GridDensity& f, double gamma_star, double a) {
  if (!(gamma_star > 0.0 && gamma_star < 1.0))
    throw std::invalid_argument("gamma_star must be in (0,1)");
  if (!(a > std::pow(2.0, gamma_star) * (gamma_star + 2.0)))
    throw std::invalid_argument("cone parameter too small: need a > 2^g* (g*+2)");
  ConeReport rep;
  const auto& edges = f.edges();
  const auto& vals = f.values();
  double total = f.mass();
  for (std::size_t i = 0; i < vals.size(); ++i) {
    rep.worst_nonnegative = std::max(rep.worst_nonnegative, -vals[i]);
    double mid = 0.5 * (edges[i] + edges[i + 1]);
    double bound = a * std::pow(mid, -gamma_star) * total;
    rep.worst_bound = std::max(rep.worst_bound, vals[i] - bound);
    if (i > 0) {
      rep.worst_nonincreasing = std::max(rep.worst_nonincreasing, vals[i] - vals[i - 1]);
      double mid_prev = 0.5 * (edges[i - 1] + edges[i]);
      double w_prev = std::pow(mid_prev, gamma_star + 1.0) * vals[i - 1];
      double w_cur = std::pow(mid, gamma_star + 1.0) * vals[i];
      rep.worst_weighted = std::max(rep.worst_weighted, w_prev - w_cur);
    }
  }
  rep.nonnegative = rep.worst_nonnegative <= 0.0;
  rep.nonincreasing = rep.worst_nonincreasing <= 0.0;
  rep.weighted_increasing = rep.worst_weighted <= 0.0;
  rep.pointwise_bound = rep.worst_bound <= 0.0;
  return rep;
}

double log_lipschitz(const GridDensity& f, double region_lo, double region_hi) {
  if (!(region_lo >= 0.0 && region_hi <= 1.0 && region_lo < region_hi))
    throw std::invalid_argument("bad region");
  const auto& edges = f.edges();
  const auto& vals = f.values();
  double worst = 0.0;
  double prev_mid = -1.0, prev_val = 0.0;
  bool have_prev = false;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    double mid = 0.5 * (edges[i] + edges[i + 1]);
    if (mid < region_lo || mid > region_hi) continue;
    if (have_prev) {
      bool z0 = prev_val == 0.0, z1 = vals[i] == 0.0;
      if (z0 != z1) return std::numeric_limits<double>::infinity();
      if (!z0) {
        double d = std::abs(std::log(vals[i]) - std::log(prev_val)) / (mid - prev_mid);
        worst = std::max(worst, d);
      }
      // both zero: log 0 - log 0 = 0, contributes nothing
    }
    prev_mid = mid;
    prev_val = vals[i];
    have_prev = true;
  }
  return worst;
}

GridDensity invariant_density(double gamma, double tol, std::size_t grid_cells,
                              std::size_t max_iterations) {
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  LsvMap map(gamma);
  GridDensity f = GridDensity::uniform(GridDensity::make_edges(grid_cells));
  for (std::size_t it = 0; it < max_iterations; ++it) {
    GridDensity g = transfer_step(map, f);
    if (tv_distance(f, g) < tol) return g;
    f = std::move(g);
  }
  throw std::runtime_error("invariant_density: power iteration did not converge");
}

DensitySampler::DensitySampler(const GridDensity& f) : edges_(f.edges()) {
  const std::size_t M = f.cells();
  cum_.resize(M + 1);
  cum_[0] = 0.0;
  double c = 0.0;
  for (std::size_t i = 0; i < M; ++i) {
    double y = f.cell_mass(i) - c;
    double t = cum_[i] + y;
    c = (t - cum_[i]) - y;
    cum_[i + 1] = t;
  }
  double total = cum_[M];
  if (!(total > 0.0)) throw std::invalid_argument("cannot sample from zero density");
  for (auto& v : cum_) v /= total;
  cum_[M] = 1.0;
}

double DensitySampler::operator()(double u) const {
  if (!(u >= 0.0 && u < 1.0)) throw std::domain_error("u must be in [0,1)");
  auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
  std::size_t i = static_cast<std::size_t>(it - cum_.begin());
  if (i == 0) i = 1;
  if (i > edges_.size() - 1) i = edges_.size() - 1;
  double m = cum_[i] - cum_[i - 1];
  double frac = m > 0.0 ? (u - cum_[i - 1]) / m : 0.0;
  frac = std::clamp(frac, 0.0, 1.0);
  return edges_[i - 1] + frac * (edges_[i] - edges_[i - 1]);
}

double sample(const GridDensity& f, double u) {
  if (!(u >= 0.0 && u < 1.0)) throw std::domain_error("u must be in [0,1)");
  const auto& edges = f.edges();
  const std::size_t M = f.cells();
  double target = u * f.mass();
  double acc = 0.0;
  for (std::size_t i = 0; i < M; ++i) {
    double m = f.cell_mass(i);
    if (acc + m > target || i + 1 == M) {
      if (m <= 0.0) return edges[i];
      double frac = (target - acc) / m;
      frac = std::clamp(frac, 0.0, 1.0);
      return edges[i] + frac * (edges[i + 1] - edges[i]);
    }
    acc += m;
  }
  return 1.0;
}

}  // namespace lsv
