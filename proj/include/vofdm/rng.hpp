#pragma once

#include <cstdint>

#include "vofdm/common.hpp"

namespace vofdm {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

// Splittable PCG32 stream.  The same (seed, stream_id) pair reproduces the
// same sequence on every platform; distinct stream ids select statistically
// independent sequences for the same seed, which is how workers and
// experiment stages get their own reproducible randomness.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
      : seed_(seed), stream_id_(stream_id), state_(0),
        inc_((stream_id << 1u) | 1u) {
    next_u32();
    state_ += detail::splitmix64(seed);
    next_u32();
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  // Child stream keyed by (seed, stream_id, key).  Forking never disturbs
  // the parent's state, so derivation trees are reproducible regardless of
  // how much each branch consumes.
  RngStream fork(std::uint64_t key) const {
    std::uint64_t child =
        detail::splitmix64(stream_id_ ^ detail::splitmix64(key + 0x632BE59BD9B4E019ULL));
    return RngStream(seed_, child);
  }

  std::uint32_t next_u32() {
    std::uint64_t old = state_;
    state_ = old * 6364136223846793005ULL + inc_;
    std::uint32_t xorshifted =
        static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    std::uint32_t rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
  }

  // Uniform on (0, 1] with 53-bit resolution; never returns 0, so it is
  // safe inside logarithms.
  double uniform01() {
    std::uint64_t hi = next_u32();
    std::uint64_t bits = (hi << 32) | next_u32();
    return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform01() <= p; }

  // One complex draw with independent N(0, variance) real and imaginary
  // parts (Box-Muller).  Consumption is fixed at two uniforms per call for
  // every variance, including zero, so stream alignment never depends on
  // parameter values.
  cpx gaussian_pair(double variance) {
    detail::require(variance >= 0.0, "gaussian_pair: variance must be >= 0");
    double u1 = uniform01();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1)) * std::sqrt(variance);
    double a = 2.0 * kPi * u2;
    return {r * std::cos(a), r * std::sin(a)};
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t state_;
  std::uint64_t inc_;
};

}  // namespace vofdm
