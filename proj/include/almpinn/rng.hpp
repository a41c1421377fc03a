#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace almpinn {

/// SplitMix64 in counter mode: draw i of stream `seed` is mix(seed + (i + 1) * golden).
///
/// The stream is fully specified by this header, so any implementation that
/// follows the same arithmetic reproduces it bit for bit:
///   mix(z): z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///           z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///           return z ^ (z >> 31)
///   uniform()      = (next >> 11) * 2^-53                  in [0, 1)
///   uniform_open() = ((next >> 11) + 0.5) * 2^-53          in (0, 1)
///   normal()       = sqrt(-2 ln u1) * cos(2 pi u2), u1 = uniform_open(), u2 = uniform()
///   laplace()      = -sign(w) * ln(1 - 2|w|), w = uniform_open() - 0.5
class CounterRng {
 public:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Independent stream for a named sub-purpose of a seed.
  static constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    return mix(seed ^ mix(stream * kGolden + 0x632BE59BD9B4E019ULL));
  }

  std::uint64_t next_u64() {
    ++counter_;
    return mix(seed_ + counter_ * kGolden);
  }

  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform_open() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    const double u1 = uniform_open();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double laplace() {
    const double w = uniform_open() - 0.5;
    const double mag = -std::log(1.0 - 2.0 * std::abs(w));
    return w < 0.0 ? -mag : mag;
  }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace almpinn
