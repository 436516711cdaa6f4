// Seeded random streams. A (seed, stream) pair fully determines the sequence:
// the 64-bit Mersenne Twister is initialised through std::seed_seq, both of
// which are specified bit-for-bit by the C++ standard. Conversions to doubles
// are done here rather than through <random> distributions, whose output is
// implementation-defined.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace wavekin {

class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
  }

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_pos() { return 1.0 - uniform(); }

  /// Standard exponential.
  double exponential() { return -std::log(uniform_pos()); }

  /// Uniform integer in [0, bound), bound > 0 (Lemire's method, unbiased).
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t x = engine_();
      const unsigned __int128 m = static_cast<unsigned __int128>(x) * bound;
      if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::uint64_t>(m >> 64);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace wavekin
