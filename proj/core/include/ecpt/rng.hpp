#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace ecpt {

/// 64-bit FNV-1a. Used to turn string keys into seeds.
constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based SplitMix64 generator.
///
/// The algorithm is fixed so that golden values are identical on every
/// platform:
///   next():      state += 0x9e3779b97f4a7c15; return mix64(state)
///   uniform():   (next() >> 11) * 2^-53, in [0, 1)
///   below(n):    t = (2^64 - n) mod n; draw r = next() until r >= t;
///                return r mod n
///   derive(k):   Rng(mix64(seed ^ mix64(k)))  (independent child stream)
///
/// Child streams are keyed, never drawn from the parent, so any record can
/// reconstruct its own stream from (global seed, key) alone.
class Rng {
 public:
  constexpr explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  constexpr std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  constexpr double uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n). n must be positive.
  constexpr std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  constexpr Rng derive(std::uint64_t key) const {
    return Rng(mix64(seed_ ^ mix64(key)));
  }
  constexpr Rng derive(std::string_view key) const { return derive(fnv1a64(key)); }

  constexpr Rng derive(std::initializer_list<std::uint64_t> keys) const {
    Rng r = *this;
    for (auto k : keys) r = r.derive(k);
    return r;
  }

  constexpr std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

}  // namespace ecpt
