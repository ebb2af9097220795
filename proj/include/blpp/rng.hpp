#pragma once

// Counter-based random numbers. Every normal draw is addressed by
// (key, block) so any sub-range of a stream can be regenerated on its own.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace blpp::rng {

/// SplitMix64 finalizer; used to turn structured seeds into well-mixed keys.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Deterministic child seed for `index` under `parent`.
constexpr std::uint64_t derive(std::uint64_t parent, std::uint64_t index) noexcept {
  return mix64(mix64(parent) ^ mix64(index + 0x632BE59BD9B4E019ULL));
}

template <class... Rest>
constexpr std::uint64_t derive(std::uint64_t parent, std::uint64_t index, Rest... rest) noexcept {
  return derive(derive(parent, index), static_cast<std::uint64_t>(rest)...);
}

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
constexpr Counter philox4x32(Counter ctr, Key key) noexcept {
  constexpr std::uint32_t kMulA = 0xD2511F53U;
  constexpr std::uint32_t kMulB = 0xCD9E8D57U;
  constexpr std::uint32_t kWeylA = 0x9E3779B9U;
  constexpr std::uint32_t kWeylB = 0xBB67AE85U;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeylA;
      key[1] += kWeylB;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMulA) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMulB) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
  }
  return ctr;
}

/// Uniform on the open interval (0,1) from the top 52 bits; the largest
/// value is 1 - 2^-53, which is representable.
constexpr double open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

/// A keyed stream of standard normals; block b yields draws 2b and 2b+1.
class NormalStream {
 public:
  explicit constexpr NormalStream(std::uint64_t key, std::uint32_t tag = 0) noexcept
      : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)}, tag_(tag) {}

  std::pair<double, double> block(std::uint64_t b) const noexcept {
    const Counter out = philox4x32(
        {static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32), tag_, 0U}, key_);
    const double u1 = open_unit((static_cast<std::uint64_t>(out[0]) << 32) | out[1]);
    const double u2 = open_unit((static_cast<std::uint64_t>(out[2]) << 32) | out[3]);
    // Box-Muller: both outputs are kept, so a block is a fixed pair.
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(theta), r * std::sin(theta)};
  }

  double operator[](std::uint64_t i) const noexcept {
    const auto [a, b] = block(i / 2);
    return (i % 2 == 0) ? a : b;
  }

  /// Writes draws first, first+1, ... into out.
  template <class It>
  void fill(std::uint64_t first, std::size_t count, It out) const {
    std::uint64_t i = first;
    const std::uint64_t last = first + count;
    if (i < last && i % 2 == 1) {
      *out++ = block(i / 2).second;
      ++i;
    }
    for (; i + 1 < last; i += 2) {
      const auto [a, b] = block(i / 2);
      *out++ = a;
      *out++ = b;
    }
    if (i < last) *out++ = block(i / 2).first;
  }

 private:
  Key key_;
  std::uint32_t tag_;
};

}  // namespace blpp::rng
