#pragma once

#include <cmath>
#include <cstdint>

namespace ctfgo {

/// Named noise streams. Each stream draws from its own counter space, so
/// adding a stream never perturbs draws of the others.
enum class NoiseStream : std::uint64_t {
  los_noise = 1,
  nlos_delay = 2,
  nlos_extra = 3,
  cn0 = 4,
  odometry = 5,
  test = 99,
};

/// Counter-based generator: every draw is a pure function of
/// (seed, stream, counter), bit-identical across runs and platforms.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  /// Uniform in (0, 1).
  double uniform(NoiseStream stream, std::uint64_t counter,
                 std::uint64_t draw = 0) const {
    const std::uint64_t bits =
        mix(seed_, static_cast<std::uint64_t>(stream), counter, draw);
    // 53 mantissa bits, shifted off zero
    return (static_cast<double>(bits >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  }

  /// Standard normal via Box-Muller on two decorrelated uniforms.
  double normal(NoiseStream stream, std::uint64_t counter,
                std::uint64_t draw = 0) const {
    const double u1 = uniform(stream, counter, 2 * draw);
    const double u2 = uniform(stream, counter, 2 * draw + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  /// Exponential with the given mean.
  double exponential(NoiseStream stream, double mean, std::uint64_t counter,
                     std::uint64_t draw = 0) const {
    return -mean * std::log(uniform(stream, counter, draw));
  }

 private:
  // splitmix64-style avalanche over the combined key
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                           std::uint64_t d) {
    std::uint64_t z = a;
    z = scramble(z + 0x9e3779b97f4a7c15ULL + b);
    z = scramble(z + 0xbf58476d1ce4e5b9ULL * (c + 1));
    z = scramble(z + 0x94d049bb133111ebULL * (d + 1));
    return scramble(z);
  }

  static std::uint64_t scramble(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t seed_;
};

}  // namespace ctfgo
