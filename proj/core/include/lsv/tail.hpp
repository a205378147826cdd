#ifndef LSV_TAIL_HPP
#define LSV_TAIL_HPP

#include <cstddef>
#include <vector>

namespace lsv {

// A nonincreasing tail bound l -> r(l) in [0,1], stored for l = 1..L with an
// extrapolation rule past L. By convention r(l) = 1 for l <= 0.
class TailFunction {
 public:
  enum class Extrapolation { Zero, Power, StretchedExp };

  // Power: r(l) = r(L) (l/L)^{-exponent} for l > L.
  // StretchedExp: r(l) = r(L) exp(-c (l^beta - L^beta)) for l > L.
  TailFunction(std::vector<double> values, Extrapolation rule, double param_a = 0.0,
               double param_b = 0.0);

  double value(long l) const;
  std::size_t length() const { return values_.size(); }
  Extrapolation rule() const { return rule_; }
  double param_a() const { return param_a_; }
  double param_b() const { return param_b_; }
  const std::vector<double>& values() const { return values_; }

  // min(1, l^-beta), tabulated to `length` with power extrapolation
  static TailFunction power(double beta, std::size_t length);
  // min(1, scale * exp(-c l^beta)), stretched-exponential extrapolation
  static TailFunction stretched_exp(double c, double beta, std::size_t length,
                                    double scale = 1.0);
  // r(l) = 0 for all l >= 1 (mass concentrated at the minimal value)
  static TailFunction zero();

 private:
  std::vector<double> values_;
  Extrapolation rule_;
  double param_a_, param_b_;
};

// Shifted partial sums l -> min(1, c_h * sum_{j=0}^{n} h(j+l)), tabulated for
// l = 1..out_length. The output inherits the input's extrapolation rule,
// anchored at the last tabulated value.
TailFunction tail_sum(const TailFunction& h, std::size_t n, double c_h,
                      std::size_t out_length);

}  // namespace lsv

#endif
