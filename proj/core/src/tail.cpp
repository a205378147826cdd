#include "lsv/tail.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lsv {

TailFunction::TailFunction(std::vector<double> values, Extrapolation rule, double param_a,
                           double param_b)
    : values_(std::move(values)), rule_(rule), param_a_(param_a), param_b_(param_b) {
  if (values_.empty()) throw std::invalid_argument("tail function needs at least one value");
  double prev = 1.0;
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("tail value outside [0,1]");
    if (v > prev + 1e-15) throw std::invalid_argument("tail values must be nonincreasing");
    prev = v;
  }
}

double TailFunction::value(long l) const {
  if (l <= 0) return 1.0;
  const long L = static_cast<long>(values_.size());
  if (l <= L) return values_[static_cast<std::size_t>(l - 1)];
  const double vL = values_.back();
  switch (rule_) {
    case Extrapolation::Zero:
      return 0.0;
    case Extrapolation::Power:
      return vL * std::pow(static_cast<double>(l) / static_cast<double>(L), -param_a_);
    case Extrapolation::StretchedExp: {
      double lb = std::pow(static_cast<double>(l), param_b_);
      double Lb = std::pow(static_cast<double>(L), param_b_);
      return vL * std::exp(-param_a_ * (lb - Lb));
    }
  }
  return 0.0;
}

TailFunction TailFunction::power(double beta, std::size_t length) {
  if (!(beta > 0.0)) throw std::invalid_argument("power tail needs beta > 0");
  std::vector<double> v(length);
  for (std::size_t i = 0; i < length; ++i)
    v[i] = std::min(1.0, std::pow(static_cast<double>(i + 1), -beta));
  return TailFunction(std::move(v), Extrapolation::Power, beta);
}

TailFunction TailFunction::stretched_exp(double c, double beta, std::size_t length,
                                         double scale) {
  if (!(c > 0.0) || !(beta > 0.0 && beta <= 1.0))
    throw std::invalid_argument("stretched-exp tail needs c > 0, beta in (0,1]");
  std::vector<double> v(length);
  for (std::size_t i = 0; i < length; ++i)
    v[i] = std::min(1.0, scale * std::exp(-c * std::pow(static_cast<double>(i + 1), beta)));
  return TailFunction(std::move(v), Extrapolation::StretchedExp, c, beta);
}

TailFunction TailFunction::zero() {
  return TailFunction(std::vector<double>{0.0}, Extrapolation::Zero);
}

TailFunction tail_sum(const TailFunction& h, std::size_t n, double c_h,
                      std::size_t out_length) {
  if (!(c_h > 0.0)) throw std::invalid_argument("c_h must be positive");
  // prefix[m] = sum_{j=1}^{m} h(j)
  std::vector<double> prefix(out_length + n + 1, 0.0);
  for (std::size_t m = 1; m <= out_length + n; ++m)
    prefix[m] = prefix[m - 1] + h.value(static_cast<long>(m));
  std::vector<double> out(out_length);
  for (std::size_t l = 1; l <= out_length; ++l)
    out[l - 1] = std::min(1.0, c_h * (prefix[l + n] - prefix[l - 1]));
  // possible rounding drift in the prefix sums; enforce monotone
  for (std::size_t i = 1; i < out.size(); ++i) out[i] = std::min(out[i], out[i - 1]);
  switch (h.rule()) {
    case TailFunction::Extrapolation::Zero:
      return TailFunction(std::move(out), TailFunction::Extrapolation::Zero);
    case TailFunction::Extrapolation::Power:
      // for l >> n the window behaves like (n+1) h(l): same power decay
      return TailFunction(std::move(out), TailFunction::Extrapolation::Power, h.param_a());
    case TailFunction::Extrapolation::StretchedExp:
    default:
      return TailFunction(std::move(out), TailFunction::Extrapolation::StretchedExp,
                          h.param_a(), h.param_b());
  }
}

}  // namespace lsv
