#pragma once

#include <cstdint>
#include <cmath>
#include <span>

namespace gordonse {

// splitmix64, used only to key streams.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Roles a derived stream can play. Part of the stream key so that e.g. the
/// batch stream of trial 0 never collides with the initialization stream.
enum class StreamRole : std::uint64_t {
  Truth = 1,
  Init = 2,
  Batch = 3,
  OracleShard = 4,
  AoInstance = 5,
  Misc = 6,
};

/// xoshiro256++ keyed by (seed, role, a, b) through a splitmix64 chain.
/// Streams with distinct keys are independent for all practical purposes and
/// trials/iterations can be dispatched to threads in any order while keeping
/// results bit-reproducible.
class RngStream {
 public:
  RngStream(std::uint64_t seed, StreamRole role, std::uint64_t a = 0,
            std::uint64_t b = 0) {
    std::uint64_t key = seed;
    key ^= splitmix64_next(key) + static_cast<std::uint64_t>(role);
    key ^= splitmix64_next(key) + a;
    key ^= splitmix64_next(key) + b;
    for (auto& w : s_) w = splitmix64_next(key);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return (next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via the Marsaglia polar method (fixed per build so that
  /// identical seeds reproduce identical batches).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  /// +1 or -1 with equal probability.
  double rademacher() { return (next_u64() >> 63) ? 1.0 : -1.0; }

  void fill_normal(std::span<double> out) {
    for (auto& x : out) x = normal();
  }

  void fill_rademacher(std::span<double> out) {
    for (auto& x : out) x = rademacher();
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace gordonse
