#pragma once

#include <cstdint>
#include <optional>

namespace abae {

/// Identifies one reproducible random stream.
///
/// Equal (seed, stream_id) pairs produce identical draw sequences on every
/// platform. Child streams are derived by hashing, so a query can hand
/// independent streams to Stage 1, Stage 2 and the bootstrap.
struct RngSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  RngSeed child(std::uint64_t tag) const noexcept;

  bool operator==(const RngSeed&) const = default;
};

/// Counter-based generator: output i is a keyed hash of i.
///
/// All transforms (uniform, bounded integer, normal) are implemented here
/// rather than through <random> distributions, whose outputs differ between
/// standard library implementations.
class Rng {
 public:
  explicit Rng(RngSeed seed) noexcept;

  std::uint64_t next_u64() noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept;

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound) noexcept;

  /// Standard normal deviate (Marsaglia polar method).
  double normal() noexcept;

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_a_;
  std::uint64_t key_b_;
  std::uint64_t counter_ = 0;
  std::optional<double> spare_normal_;
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace abae
