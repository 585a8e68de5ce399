#ifndef GAL_RNG_HPP
#define GAL_RNG_HPP

#include <cstdint>

namespace gal {

// splitmix64: the output sequence is fully pinned by this implementation, so
// results are reproducible across platforms (std:: distributions are not).
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic stream of uniforms/integers derived from a 64-bit seed.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {
    // decorrelate trivially related seeds
    splitmix64(state_);
  }

  uint64_t next_u64() { return splitmix64(state_); }

  // uniform double in [0,1) with 53 random bits
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform integer in [0, n)
  uint64_t next_below(uint64_t n) {
    // multiply-shift; bias < 2^-64, irrelevant at our sample counts
    return static_cast<uint64_t>((static_cast<__uint128_t>(next_u64()) * n) >> 64);
  }

  double next_in(double lo, double hi) { return lo + (hi - lo) * next_double(); }

 private:
  uint64_t state_;
};

// Independent child seed for block/replica `index` of a master seed.
inline uint64_t child_seed(uint64_t master, uint64_t index) {
  uint64_t s = master ^ (0x9e3779b97f4a7c15ULL + index * 0xd1342543de82ef95ULL);
  splitmix64(s);
  return splitmix64(s);
}

}  // namespace gal

#endif  // GAL_RNG_HPP
