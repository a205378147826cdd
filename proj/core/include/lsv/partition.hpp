#ifndef LSV_PARTITION_HPP
#define LSV_PARTITION_HPP

#include <cstddef>
#include <vector>

#include "lsv/density.hpp"
#include "lsv/map.hpp"

namespace lsv {

// First-entry partition {x_n} of (0,1/2] or first-return partition {y_n} of
// Y = (1/2,1] for a given map sequence. Intervals are half-open (a,b].
struct PartitionPoints {
  enum class Kind { Entry, Return };
  Kind kind;
  std::vector<double> points;  // strictly decreasing: x_1 > x_2 > ... (or y_1 > ...)
  const ParameterSequence* seq_ref = nullptr;

  double point(std::size_t n) const { return points.at(n - 1); }  // 1-based
  std::size_t count() const { return points.size(); }
};

// x_1 = 1/2, x_n = g_1 o g_2 o ... o g_{n-1}(1/2) where g_k is the left
// inverse of T_k. A point in (x_{n+1}, x_n] first enters Y = (1/2,1] at step n.
PartitionPoints entry_partition(const ParameterSequence& seq, std::size_t N);

// y_1 = 1 and, for n >= 2, y_n = (x'_{n-1} + 1)/2 where x' is the entry
// partition of the shifted sequence T_2, T_3, ... A point in (y_{n+1}, y_n]
// first returns to Y at step n.
PartitionPoints return_partition(const ParameterSequence& seq, std::size_t N);

// Tail masses t_n = mu((0, x_n] union (1/2, y_n]) for n = 1..N: the mass not
// yet returned to Y by time n.
std::vector<double> cone_tail(const GridDensity& density, const PartitionPoints& entry,
                              const PartitionPoints& ret, std::size_t N);

}  // namespace lsv

#endif
