#pragma once

#include <cstdint>
#include <random>

namespace irtgrid {

/// splitmix64 step; mixes a seed with stream tags to derive independent
/// substreams, e.g. one per simulated grid cell.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

/// Seeded generator with fully specified uniform and normal transforms.
/// mt19937_64 output is pinned by the standard and the transforms below
/// avoid implementation-defined std::*_distribution behaviour, so sampled
/// sequences are reproducible across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; caches the paired draw.
  double normal();

  /// Uniform integer in [0, n); unbiased (rejection sampling). n must be > 0.
  std::uint64_t uniform_below(std::uint64_t n);

  std::uint64_t next_u64() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace irtgrid
