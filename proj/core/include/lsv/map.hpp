#ifndef LSV_MAP_HPP
#define LSV_MAP_HPP

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace lsv {

// One intermittent interval map
//   T(x) = x (1 + 2^gamma x^gamma)  for x <= 1/2,
//   T(x) = 2x - 1                   for x >  1/2,
// with gamma in (0,1). Neutral fixed point at 0, full branches onto [0,1].
struct LsvMap {
  double gamma;
  explicit LsvMap(double g);
};

enum class Branch { Left, Right };

double apply(const LsvMap& map, double x);

// One-sided derivative; the branch containing x decides (1/2 belongs to the
// left branch).
double derivative(const LsvMap& map, double x);

// Inverse of the selected branch. Right branch is affine; the left branch is
// inverted by bracketed bisection with Newton acceleration, absolute
// tolerance 1e-14.
double inverse_branch(const LsvMap& map, Branch branch, double y);

// A finite sequence gamma_1, gamma_2, ... in (0, gamma_star], selecting the
// map applied at each step. gamma_star is stored explicitly: experiments
// declare the rate exponent beta = 1/gamma_star up front.
class ParameterSequence {
 public:
  enum class Kind { Constant, Explicit, Quasistatic };

  static ParameterSequence constant(double gamma, std::size_t length, double gamma_star);
  static ParameterSequence from_list(std::vector<double> gammas, double gamma_star);

  std::size_t size() const { return gammas_.size(); }
  // 1-based, matching the composition indices T_k.
  double gamma(std::size_t k) const;
  double gamma_star() const { return gamma_star_; }
  Kind kind() const { return kind_; }
  const std::vector<double>& gammas() const { return gammas_; }

  LsvMap map(std::size_t k) const { return LsvMap(gamma(k)); }

  // Drops the first `count` entries (the sequence T_{count+1}, T_{count+2}, ...).
  ParameterSequence shifted(std::size_t count) const;

 private:
  ParameterSequence(Kind kind, std::vector<double> gammas, double gamma_star);
  Kind kind_;
  std::vector<double> gammas_;
  double gamma_star_;
};

// T_l o ... o T_k (x); identity when k > l. Indices are 1-based.
double compose_apply(const ParameterSequence& seq, std::size_t k, std::size_t l, double x);

// Level-n quasistatic sequence gamma_k = curve(k/n), k = 0..n (length n+1).
ParameterSequence quasistatic_sequence(const std::function<double(double)>& curve,
                                       double gamma_star, std::size_t n);

}  // namespace lsv

#endif
