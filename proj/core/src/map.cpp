#include "lsv/map.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lsv {

namespace {

void check_point(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("point outside [0,1]");
}

// 2^gamma x^gamma = exp(gamma log(2x)); exact 1 at x = 1/2, and 0 at x = 0.
double pow_term(double gamma, double x) {
  if (x == 0.0) return 0.0;
  return std::exp(gamma * std::log(2.0 * x));
}

}  // namespace

LsvMap::LsvMap(double g) : gamma(g) {
  if (!(g > 0.0 && g < 1.0)) throw std::domain_error("gamma must be in (0,1)");
}

double apply(const LsvMap& map, double x) {
  check_point(x);
  if (x <= 0.5) {
    double y = x * (1.0 + pow_term(map.gamma, x));
    return std::min(y, 1.0);
  }
  return 2.0 * x - 1.0;
}

double derivative(const LsvMap& map, double x) {
  check_point(x);
  if (x <= 0.5) return 1.0 + (1.0 + map.gamma) * pow_term(map.gamma, x);
  return 2.0;
}

double inverse_branch(const LsvMap& map, Branch branch, double y) {
  check_point(y);
  if (branch == Branch::Right) return (y + 1.0) / 2.0;
  if (y == 0.0) return 0.0;
  if (y == 1.0) return 0.5;
  // Bracketed solve of x (1 + 2^g x^g) = y on [0, 1/2]. Newton steps are
  // taken while they stay inside the bracket, bisection otherwise.
  double lo = 0.0, hi = 0.5;
  double x = y / 2.0;  // T(x) >= x, so the root is below y; y/2 is a cheap start
  for (int it = 0; it < 200; ++it) {
    double fx = apply(map, x) - y;
    if (fx > 0.0)
      hi = x;
    else
      lo = x;
    if (hi - lo < 1e-14) break;
    double step = fx / derivative(map, x);
    double xn = x - step;
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    x = xn;
  }
  return 0.5 * (lo + hi);
}

ParameterSequence::ParameterSequence(Kind kind, std::vector<double> gammas, double gamma_star)
    : kind_(kind), gammas_(std::move(gammas)), gamma_star_(gamma_star) {
  if (!(gamma_star > 0.0 && gamma_star < 1.0))
    throw std::domain_error("gamma_star must be in (0,1)");
  for (double g : gammas_)
    if (!(g > 0.0 && g <= gamma_star))
      throw std::domain_error("sequence entry outside (0, gamma_star]");
}

ParameterSequence ParameterSequence::constant(double gamma, std::size_t length,
                                              double gamma_star) {
  return ParameterSequence(Kind::Constant, std::vector<double>(length, gamma), gamma_star);
}

ParameterSequence ParameterSequence::from_list(std::vector<double> gammas, double gamma_star) {
  return ParameterSequence(Kind::Explicit, std::move(gammas), gamma_star);
}

double ParameterSequence::gamma(std::size_t k) const {
  if (k < 1 || k > gammas_.size()) throw std::out_of_range("sequence index");
  return gammas_[k - 1];
}

ParameterSequence ParameterSequence::shifted(std::size_t count) const {
  if (count > gammas_.size()) throw std::out_of_range("shift beyond sequence length");
  return ParameterSequence(Kind::Explicit,
                           std::vector<double>(gammas_.begin() + static_cast<long>(count),
                                               gammas_.end()),
                           gamma_star_);
}

double compose_apply(const ParameterSequence& seq, std::size_t k, std::size_t l, double x) {
  if (k > l) return x;
  if (l > seq.size()) throw std::out_of_range("composition end exceeds sequence length");
  for (std::size_t i = k; i <= l; ++i) x = apply(seq.map(i), x);
  return x;
}

ParameterSequence quasistatic_sequence(const std::function<double(double)>& curve,
                                       double gamma_star, std::size_t n) {
  if (n < 1) throw std::domain_error("quasistatic level must be >= 1");
  std::vector<double> gammas(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    double g = curve(static_cast<double>(k) / static_cast<double>(n));
    if (!(g > 0.0 && g <= gamma_star))
      throw std::domain_error("curve value outside (0, gamma_star]");
    gammas[k] = g;
  }
  return ParameterSequence::from_list(std::move(gammas), gamma_star);
}

}  // namespace lsv
