#pragma once

// Counter-based splittable RNG (SplitMix64 finalizer applied to
// seed-xor-counter). Same seed + same draw sequence = same stream on any
// platform; child streams derive by hashing a label into the seed.

#include <cmath>
#include <cstdint>

namespace cmcflow {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), counter_(0) {}

  std::uint64_t next_u64() { return mix(seed_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  // uniform in [0,1)
  double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Marsaglia polar
  double normal() {
    for (;;) {
      double u = 2.0 * uniform() - 1.0;
      double v = 2.0 * uniform() - 1.0;
      double s = u * u + v * v;
      if (s > 0.0 && s < 1.0) {
        double f = std::sqrt(-2.0 * std::log(s) / s);
        return u * f;
      }
    }
  }

  Rng split(std::uint64_t label) const { return Rng(mix(seed_ ^ mix(label))); }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  std::uint64_t seed_;
  std::uint64_t counter_;
};

}  // namespace cmcflow
