#pragma once

// Counter-based random streams. A draw is a pure function of
// (master seed, replicate, particle, draw index), so results do not depend on
// which worker computes them or in what order.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace hardedge {

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      ctr = single_round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static Counter single_round(const Counter& ctr, const Key& key) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
};

/// Smallest and largest uniforms ever produced; keeps inverse-CDF sampling off
/// the p = 0 and p = 1 endpoints.
inline constexpr double kUniformMin = 0x1p-53;
inline constexpr double kUniformMax = 1.0 - 0x1p-53;

/// Maps 53 random bits to the open interval, clamped to [2^-53, 1 - 2^-53].
inline double bits_to_uniform(std::uint64_t bits) {
  const double u = (static_cast<double>(bits >> 11) + 0.5) * 0x1p-53;
  return u < kUniformMin ? kUniformMin : (u > kUniformMax ? kUniformMax : u);
}

/// A stream of uniforms addressed by (seed, replicate, particle). Each call to
/// `uniform(k)` is independent of every other address.
class UniformStream {
 public:
  UniformStream(std::uint64_t seed, std::uint64_t replicate, std::uint64_t particle)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        replicate_(replicate),
        particle_(particle) {}

  /// Two 32-bit words per uniform; one Philox block yields uniforms 2k and 2k+1.
  double uniform(std::uint32_t index) const {
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(particle_),
                                  static_cast<std::uint32_t>(replicate_),
                                  static_cast<std::uint32_t>(replicate_ >> 32),
                                  index / 2u};
    const auto out = Philox4x32::generate(ctr, key_);
    const std::size_t base = (index % 2u) * 2u;
    const std::uint64_t bits = (static_cast<std::uint64_t>(out[base]) << 32) | out[base + 1];
    return bits_to_uniform(bits);
  }

  /// Standard normal via Box-Muller on uniforms (2k, 2k+1).
  double normal(std::uint32_t index) const {
    const double u1 = uniform(2u * index);
    const double u2 = uniform(2u * index + 1u);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  Philox4x32::Key key_;
  std::uint64_t replicate_;
  std::uint64_t particle_;
};

}  // namespace hardedge
