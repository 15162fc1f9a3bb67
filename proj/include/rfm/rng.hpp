#pragma once

#include <cstdint>

namespace rfm {

/// SplitMix64 (Steele, Lea, Flood 2014). The state advances by the golden
/// gamma 0x9e3779b97f4a7c15 and each output is the mixed state, so any port
/// that reproduces `next_u64` reproduces every frequency sample bit for bit.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform on (0, 1): 53 random mantissa bits, exact zeros redrawn.
  double next_open01() {
    for (;;) {
      const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
      if (u > 0.0) return u;
    }
  }

  /// Independent child stream, used to give each patch or trial its own
  /// generator without consuming the parent's sequence in a data-dependent way.
  SplitMix64 split() { return SplitMix64(next_u64()); }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

}  // namespace rfm
