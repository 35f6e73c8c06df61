#include "abae/rng.hpp"

#include <cmath>

namespace abae {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kStreamSalt = 0xd1b54a32d192ed03ULL;
constexpr std::uint64_t kChildSalt = 0x8cb92ba72f3d8dd7ULL;
// Deriving key_b from the counter sequence itself (key_a + c * kGolden)
// would make word c collapse to mix64(0) in every stream.
constexpr std::uint64_t kKeySalt = 0x632be59bd9b4e019ULL;

}  // namespace

RngSeed RngSeed::child(std::uint64_t tag) const noexcept {
  return RngSeed{seed, mix64(stream_id ^ mix64(tag + kChildSalt))};
}

Rng::Rng(RngSeed seed) noexcept
    : key_a_(mix64(seed.seed ^ mix64(seed.stream_id + kStreamSalt))),
      key_b_(mix64(key_a_ ^ kKeySalt)) {}

std::uint64_t Rng::next_u64() noexcept {
  const std::uint64_t c = counter_++;
  return mix64(mix64(c * kGolden + key_a_) ^ key_b_);
}

double Rng::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t bound) noexcept {
  // Lemire's nearly-divisionless method.
  std::uint64_t x = next_u64();
  __uint128_t m = static_cast<__uint128_t>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = next_u64();
      m = static_cast<__uint128_t>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double Rng::normal() noexcept {
  if (spare_normal_) {
    const double v = *spare_normal_;
    spare_normal_.reset();
    return v;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v * f;
  return u * f;
}

}  // namespace abae
