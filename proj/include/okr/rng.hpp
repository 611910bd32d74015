#pragma once

#include <cmath>
#include <cstdint>

namespace okr {

// SplitMix64 (Steele, Lea, Flood 2014). Counter-based: the t-th output is a
// pure function of (seed, t), so streams are portable across platforms and
// languages given the same 64-bit arithmetic. This is the single generator
// identity for the whole artifact; see README for the stream-derivation
// convention.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform on [0,1) with 53 random bits.
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; consumes two uniforms, returns one
  // deviate (the sine branch is discarded to keep stream accounting simple).
  double next_normal() {
    double u1 = next_uniform();
    double u2 = next_uniform();
    while (u1 <= 0.0) u1 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Centered Gaussian(sd) truncated at +-3 sd, by rejection.
  double next_truncated_normal(double sd) {
    if (sd == 0.0) return 0.0;
    double z = next_normal();
    while (std::abs(z) > 3.0) z = next_normal();
    return sd * z;
  }

 private:
  std::uint64_t state_;
};

// 64-bit finalizer of SplitMix64, used as the stream-derivation hash.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Independent substream for (seed, tag): different tags never share state
// with each other or with the parent seed stream.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t tag) {
  return SplitMix64(mix64(seed ^ mix64(tag + 0x632BE59BD9B4E019ull)));
}

}  // namespace okr
