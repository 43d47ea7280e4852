#pragma once

#include <cmath>
#include <cstdint>

namespace jumphinf {

// Counter-based generator built on splitmix64.  Every trajectory or restart
// derives its own stream from (seed, stream_id), so results do not depend on
// how work is split across threads.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  SplitMix64(std::uint64_t seed, std::uint64_t stream_id)
      : state_(mix(seed ^ mix(stream_id ^ 0x9e3779b97f4a7c15ULL))) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // Uniform on (0, 1]; never returns 0, so log() is always safe.
  double uniform() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

  // Inverse-CDF exponential with the given rate.
  double exponential(double rate) { return -std::log(uniform()) / rate; }

  // Standard normal via Box-Muller; one draw consumes two uniforms.
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

}  // namespace jumphinf
