#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace polylab {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A block of
// four 32-bit words is a pure function of (counter, key), so any draw can be
// regenerated from its index without replaying a stream.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter block(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeylA;
        key[1] += kWeylB;
      }
      ctr = single_round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMulA = 0xD2511F53u;
  static constexpr std::uint32_t kMulB = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeylA = 0x9E3779B9u;
  static constexpr std::uint32_t kWeylB = 0xBB67AE85u;

  static constexpr Counter single_round(const Counter& c, const Key& k) noexcept {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMulA) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMulB) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

// splitmix64 finalizer; used to fold names and indices into sub-seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_name(std::string_view name) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ull;  // FNV-1a
  for (char ch : name) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001B3ull;
  }
  return h;
}

/// Sub-seed for (seed, component, index). One run seed governs every stream.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view component,
                                    std::uint64_t index = 0) noexcept {
  return mix64(mix64(seed ^ hash_name(component)) + mix64(index + 0x632BE59BD9B4E019ull));
}

/// Random access view of the stream keyed by `seed`: draw(i, lane) returns the
/// same bits for the same arguments regardless of call order or thread.
class CounterStream {
 public:
  explicit constexpr CounterStream(std::uint64_t seed) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  constexpr Philox4x32::Counter bits(std::uint64_t index, std::uint32_t lane = 0) const noexcept {
    return Philox4x32::block(
        {static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), lane, 0u}, key_);
  }

  // Two uniforms in the open interval (0, 1), 53 bits each.
  std::array<double, 2> uniform2(std::uint64_t index, std::uint32_t lane = 0) const noexcept {
    const auto b = bits(index, lane);
    const std::uint64_t u = (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
    const std::uint64_t v = (static_cast<std::uint64_t>(b[2]) << 32) | b[3];
    return {to_open_unit(u), to_open_unit(v)};
  }

  double uniform(std::uint64_t index, std::uint32_t lane = 0) const noexcept {
    return uniform2(index, lane)[0];
  }

  // Box-Muller on one counter block; only the cosine branch is used so each
  // index maps to exactly one normal deviate.
  double normal(std::uint64_t index, std::uint32_t lane = 0) const noexcept {
    const auto [u, v] = uniform2(index, lane);
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
  }

 private:
  static double to_open_unit(std::uint64_t x) noexcept {
    return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
  }

  Philox4x32::Key key_;
};

}  // namespace polylab
