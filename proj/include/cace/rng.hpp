#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace cace {

/// SplitMix64 finalizer; a bijection on uint64, used to decorrelate seeds.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

/// Deterministic per-replication seed. Injective in rep_index for a fixed
/// master seed: rep -> master + odd*(rep+1) is a bijection mod 2^64 and
/// mix64 is a bijection, so distinct replications never share a stream.
inline constexpr std::uint64_t derive_rep_seed(std::uint64_t master_seed, std::uint64_t rep_index) {
  return mix64(master_seed + 0x9E3779B97F4A7C15ull * (rep_index + 1));
}

/// Random stream with its own distribution implementations so that draw
/// sequences do not depend on the standard library in use. All trials are
/// reproducible from (master seed, replication index) alone.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Marsaglia polar method; the spare deviate is discarded to keep the
  /// draw sequence a simple function of the call sequence.
  double normal(double mu, double sd) {
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    return mu + sd * u * std::sqrt(-2.0 * std::log(s) / s);
  }

  /// Unbiased draw from [0, n) by rejection.
  std::uint64_t uniform_below(std::uint64_t n) {
    const std::uint64_t threshold = (-n) % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x < threshold);
    return x % n;
  }

  /// Fisher-Yates with the stream's own bounded draws (std::shuffle is
  /// implementation-defined).
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace cace
