#pragma once

// Portable, counter-based random streams.
//
// Every stream is SplitMix64 (Steele, Lea & Flood 2014) started from a key.
// Keys are derived by hashing (seed, index...) through the SplitMix64
// finalizer, so a stream depends only on its coordinates and never on how
// many draws other streams consumed. Uniforms use the top 53 bits; normals
// use the Box-Muller transform. The integer streams are bit-identical on
// every platform; the normal draws rely on std::log/std::sqrt/std::cos.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace ivmed::rng {

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

/// SplitMix64 output finalizer (a bijection on 64-bit words).
constexpr std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Hash of an ordered tuple of words; used for all seed derivation.
/// derive_key({a, b}) != derive_key({b, a}) in general.
constexpr std::uint64_t derive_key(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;  // arbitrary nonzero start
  for (std::uint64_t p : parts) h = mix64(h + kGoldenGamma + mix64(p));
  return h;
}

class Stream {
 public:
  explicit constexpr Stream(std::uint64_t key) : state_(key) {}

  constexpr std::uint64_t next_u64() {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

  /// Uniform on [0, 1).
  constexpr double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer on [0, bound), bound > 0. Multiply-shift reduction.
  std::uint64_t below(std::uint64_t bound) {
    __extension__ using u128 = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<u128>(next_u64()) * bound) >> 64);
  }

  /// Standard normal. Consumes exactly two words.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace ivmed::rng
