#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace safeshed::rng {

// SplitMix64 finalizer, used as the mixing step for counter-based stream
// derivation. Every RNG stream in the project is a pure function of the
// master seed and an integer path, so reseeding or re-running any slice of
// the work reproduces the same draws regardless of scheduling.
constexpr std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix(seed);
  for (std::uint64_t word : path) {
    h = mix(h ^ mix(word));
  }
  return h;
}

// Stream tags keep unrelated consumers of the same master seed apart.
enum Stream : std::uint64_t {
  kPolicyInit = 1,
  kDirection = 2,
  kTaskShuffle = 3,
  kRollout = 4,
};

inline double uniform01(std::mt19937_64& gen) {
  // 53-bit mantissa draw in [0, 1); independent of std::distribution
  // implementations so results are identical for a given generator state.
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Standard normal sampler via Box-Muller on explicit 53-bit uniforms.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : gen_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite.
    const double u1 = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform01(gen_);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.141592653589793238462643383279502884 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace safeshed::rng
