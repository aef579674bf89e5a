#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace specrank {

/// SplitMix64 step, used for seed mixing and substream derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic salt chain for nested experiment seeds.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t salt) {
  std::uint64_t s = master ^ (0x9e3779b97f4a7c15ULL * (salt + 1));
  return splitmix64(s);
}

/// Deterministic random source. Every sampling routine in the library takes an
/// explicit Rng so results are pure functions of (inputs, seed). Gaussian
/// draws use the Marsaglia polar method rather than std::normal_distribution
/// so the exact draw sequence is owned by this codebase.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent substream: the same (master, index) always yields the same
  /// stream, and distinct indices give decorrelated streams.
  static Rng stream(std::uint64_t master, std::uint64_t index) {
    std::uint64_t s = master;
    (void)splitmix64(s);
    s ^= 0x9e3779b97f4a7c15ULL * (index + 1);
    return Rng(splitmix64(s));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double gauss() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace specrank
