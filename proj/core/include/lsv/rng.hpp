#ifndef LSV_RNG_HPP
#define LSV_RNG_HPP

#include <cmath>
#include <cstdint>

namespace lsv::rng {

// SplitMix64 finalizer, used to key streams.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based stream: state derived deterministically from
// (master_seed, stream_index), generator is xoshiro256++.
// All randomness in the library flows through these streams; no ambient
// entropy, so runs are reproducible bit-for-bit from (seed, index).
class Stream {
 public:
  Stream(std::uint64_t master_seed, std::uint64_t stream_index) {
    std::uint64_t key = mix64(master_seed) ^ mix64(stream_index * 0xd1342543de82ef95ULL + 1);
    for (auto& w : s_) {
      key = mix64(key);
      w = key;
    }
    // xoshiro must not start from the all-zero state
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
  }

  std::uint64_t next_u64() {
    auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // uniform in [0,1)
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform in (0,1)
  double next_open() {
    double u;
    do {
      u = next_double();
    } while (u == 0.0);
    return u;
  }

  // geometric on {1,2,...} with success probability theta
  long next_geometric(double theta) {
    if (theta >= 1.0) return 1;
    double u = next_open();
    return 1 + static_cast<long>(std::floor(std::log(u) / std::log1p(-theta)));
  }

 private:
  std::uint64_t s_[4];
};

}  // namespace lsv::rng

#endif
