#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace apla {

// splitmix64; used to spread user seeds and derive independent stream seeds.
struct SplitMix64 {
  std::uint64_t state;
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
};

// Deterministic child seed for stream `id` (replicates, sweep cells, episodes).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t id) {
  SplitMix64 sm{master ^ (0xD1B54A32D192ED03ULL * (id + 1))};
  sm.next();
  return sm.next();
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  return derive_seed(derive_seed(master, a), b);
}

// Seedable generator with fixed-algorithm uniform/categorical draws so that
// runs reproduce bit-for-bit across platforms and thread counts.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform index in [0, n).
  int uniform_index(int n) {
    int k = static_cast<int>(uniform01() * n);
    return k >= n ? n - 1 : k;
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // CDF walk over weights (need not be exactly normalized); the last entry
  // with positive mass absorbs the tail.
  int categorical(std::span<const double> weights) {
    const double u = uniform01();
    double cum = 0.0;
    int last = 0;
    for (int k = 0; k < static_cast<int>(weights.size()); ++k) {
      if (weights[k] <= 0.0) continue;
      cum += weights[k];
      last = k;
      if (u < cum) return k;
    }
    return last;
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace apla
