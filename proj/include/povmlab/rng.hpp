// Counter-based random streams.
//
// Every draw is a pure function of (seed, stream, counter): the stream key is
// a SplitMix64 hash of the seed and stream id, and draw i is the SplitMix64
// output at position i of that key's sequence. Any shot of any trial can be
// regenerated independently, which keeps sampled reports byte-stable no
// matter how the work is scheduled.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace povmlab {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

class CounterRng {
 public:
  using result_type = std::uint64_t;

  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(splitmix64(seed ^ splitmix64(stream ^ 0xD1B54A32D192ED03ULL))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  /// Raw 64-bit draw at an absolute position; does not touch the counter.
  constexpr result_type at(std::uint64_t counter) const {
    return splitmix64(key_ + counter * 0x9E3779B97F4A7C15ULL);
  }

  /// Uniform double in the open interval (0, 1) at an absolute position.
  constexpr double uniform_at(std::uint64_t counter) const {
    return (static_cast<double>(at(counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  constexpr result_type operator()() { return at(counter_++); }
  constexpr double uniform() { return uniform_at(counter_++); }

  /// Standard normal deviate via Box-Muller (two uniforms per call).
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  constexpr std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace povmlab
