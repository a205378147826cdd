#include "lsv/partition.hpp"

#include <cmath>
#include <stdexcept>

namespace lsv {

PartitionPoints entry_partition(const ParameterSequence& seq, std::size_t N) {
  if (N < 1) throw std::invalid_argument("partition needs N >= 1");
  if (N >= 2 && seq.size() < N - 1) throw std::out_of_range("sequence too short for partition");
  PartitionPoints part;
  part.kind = PartitionPoints::Kind::Entry;
  part.seq_ref = &seq;
  part.points.resize(N);
  part.points[0] = 0.5;
  // Backward iteration: x_n = g_1(g_2(... g_{n-1}(1/2))). Inverses contract
  // toward the neutral fixed point, so each chain is numerically stable.
  for (std::size_t n = 2; n <= N; ++n) {
    double z = 0.5;
    for (std::size_t k = n - 1; k >= 1; --k) z = inverse_branch(seq.map(k), Branch::Left, z);
    part.points[n - 1] = z;
  }
  return part;
}

PartitionPoints return_partition(const ParameterSequence& seq, std::size_t N) {
  if (N < 1) throw std::invalid_argument("partition needs N >= 1");
  PartitionPoints part;
  part.kind = PartitionPoints::Kind::Return;
  part.seq_ref = &seq;
  part.points.resize(N);
  part.points[0] = 1.0;
  if (N >= 2) {
    if (seq.size() < N - 1) throw std::out_of_range("sequence too short for partition");
    ParameterSequence shifted = seq.shifted(1);
    PartitionPoints entry = entry_partition(shifted, N - 1);
    for (std::size_t n = 2; n <= N; ++n)
      part.points[n - 1] = (entry.point(n - 1) + 1.0) / 2.0;
  }
  return part;
}

std::vector<double> cone_tail(const GridDensity& density, const PartitionPoints& entry,
                              const PartitionPoints& ret, std::size_t N) {
  if (entry.kind != PartitionPoints::Kind::Entry || ret.kind != PartitionPoints::Kind::Return)
    throw std::invalid_argument("cone_tail: partition kinds swapped");
  if (entry.seq_ref != ret.seq_ref)
    throw std::invalid_argument("cone_tail: partitions from different sequences");
  if (entry.count() < N || ret.count() < N)
    throw std::out_of_range("cone_tail: partitions shorter than N");
  std::vector<double> tails(N);
  double half = density.cdf(0.5);
  for (std::size_t n = 1; n <= N; ++n) {
    double t = density.cdf(entry.point(n)) + (density.cdf(ret.point(n)) - half);
    tails[n - 1] = t;
  }
  return tails;
}

}  // namespace lsv
