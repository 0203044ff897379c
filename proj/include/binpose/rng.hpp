#pragma once

#include <cmath>
#include <cstdint>

namespace binpose {

/// Counter-based random stream (splitmix64). Cheap to construct per pixel,
/// so renders stay deterministic no matter how work is scheduled.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_uniform();
  }

  /// Standard normal via Box-Muller.
  double next_normal() {
    double u1 = next_uniform();
    while (u1 <= 0.0) u1 = next_uniform();
    const double u2 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::uint64_t state_;
};

/// Stream for one pixel of one render: decorrelates seed and pixel index.
inline SplitMix64 pixel_stream(std::uint64_t seed, std::uint64_t pixel_index) {
  SplitMix64 mix(seed ^ (pixel_index * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL));
  // Burn one output so neighbouring pixel seeds decorrelate fully.
  mix.next_u64();
  return mix;
}

}  // namespace binpose
