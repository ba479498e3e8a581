#pragma once

#include <cstdint>

namespace tg {

// All randomness in this library flows through the generators below so that
// any reimplementation, in any language, can match our streams bit for bit.
//
// Pseudo-random core: SplitMix64 (Steele, Lea & Flood; the java.util
// SplittableRandom finalizer). State advances by the 64-bit golden-ratio
// constant and each output is the mix64 finalizer of the new state.
//
// Uniform doubles: u = ((x >> 11) + 1) * 2^-53, which lies in (0, 1]. The +1
// keeps log(u) finite for the Gaussian transform below.
//
// Gaussians: plain Box-Muller. Each pair of uniforms (u1, u2) yields
//   z0 = sqrt(-2 ln u1) * cos(2 pi u2)
//   z1 = sqrt(-2 ln u1) * sin(2 pi u2)
// z0 is returned first, z1 is cached and returned on the next call.

inline constexpr std::uint64_t kGolden64 = 0x9E3779B97F4A7C15ull;

/// SplitMix64 output finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

  constexpr std::uint64_t next() {
    state_ += kGolden64;
    return mix64(state_);
  }

  /// Uniform double in (0, 1].
  double uniform() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

/// Standard-normal stream over a SplitMix64 source (Box-Muller with the
/// second variate cached).
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : base_(seed) {}

  double next();

 private:
  SplitMix64 base_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

// Stream namespacing. Different uses of randomness under one user seed must
// draw from distinct, documented streams. A stream seed is
//   mix64((base ^ domain) + kGolden64 * (t + 1))
// where `domain` is one of the constants below and `t` is the timestamp the
// stream belongs to (0 when no timestamp applies).
namespace seed_domain {
inline constexpr std::uint64_t data = 0x64617461ull;     // "data"
inline constexpr std::uint64_t init = 0x696E6974ull;     // "init"
inline constexpr std::uint64_t shuffle = 0x7368666Cull;  // "shfl"
}  // namespace seed_domain

constexpr std::uint64_t stream_seed(std::uint64_t base, std::uint64_t domain,
                                    std::int64_t t) {
  return mix64((base ^ domain) + kGolden64 * (static_cast<std::uint64_t>(t) + 1));
}

/// Per-timestamp data seed: stream_seed with the `data` domain.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::int64_t t) {
  return stream_seed(base, seed_domain::data, t);
}

}  // namespace tg
