#pragma once

// Deterministic generator: splitmix64 streams plus Box-Muller normals
// ("splitmix64-bm", v1). Output is bit-identical for a given seed on any
// platform; per-trial streams are derived as seed XOR trial-index.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace gmrf {

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in (0, 1).
  double next_uniform() {
    // 53-bit mantissa; offset by half an ulp so 0 is never produced
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (one value per pair, partner cached).
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

inline std::uint64_t trial_stream_seed(std::uint64_t base_seed, std::uint64_t trial_index) {
  return base_seed ^ trial_index;
}

}  // namespace gmrf
