#pragma once

#include <cstdint>
#include <span>

namespace xsslab {

// Seeded splitmix64 stream. All randomness in the project goes through this
// class so results are identical across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Unbiased integer in [0, bound). bound must be > 0.
  uint64_t below(uint64_t bound) {
    const uint64_t threshold = -bound % bound;
    for (;;) {
      uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  // Uniform double in [0, 1) with 53 bits of precision.
  double next_real() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool chance(double p) { return next_real() < p; }

  // Index drawn with probability proportional to weights. Caller guarantees
  // at least one positive weight.
  size_t pick_weighted(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double r = next_real() * total;
    double acc = 0.0;
    for (size_t i = 0; i + 1 < weights.size(); ++i) {
      acc += weights[i];
      if (r < acc) return i;
    }
    return weights.size() - 1;
  }

 private:
  uint64_t state_;
};

// Stable per-item seed derivation (seed_i = master xor i). The xor result is
// fed through splitmix64 by Rng itself, so nearby indices decorrelate.
inline uint64_t derive_seed(uint64_t master, uint64_t index) { return master ^ index; }

// Domain-separated sub-seed for independent random streams within one run.
inline uint64_t mix_seed(uint64_t master, uint64_t domain) {
  Rng r(master ^ (0xd1b54a32d192ed03ull * (domain + 1)));
  return r.next_u64();
}

}  // namespace xsslab
