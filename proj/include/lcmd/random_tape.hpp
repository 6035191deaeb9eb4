#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string_view>

namespace lcmd {

// 64-bit FNV-1a, used to turn purpose tags into hash input.
constexpr std::uint64_t fnv1a(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Identifies one random value: a purpose tag, the entity it belongs to and
// the index of the draw for that entity.
struct DrawKey {
  std::string_view tag;
  std::uint64_t id = 0;
  std::uint64_t index = 0;
};

// Stateless keyed randomness. Every draw is a pure function of
// (seed, tag, id, index, range), so any element's random data can be
// recomputed without generating anything else.
class RandomTape {
 public:
  constexpr explicit RandomTape(std::uint64_t seed = 0) noexcept : seed_(seed) {}

  constexpr std::uint64_t seed() const noexcept { return seed_; }

  // Full-width 64-bit word for `key`.
  constexpr std::uint64_t word(const DrawKey& key) const noexcept {
    return word(key, 0);
  }

  // Uniform integer in [0, range). Rejection sampling keeps the result exactly
  // uniform; each retry rehashes with a fresh attempt counter.
  std::uint64_t uniform(const DrawKey& key, std::uint64_t range) const {
    if (range == 0) throw std::invalid_argument("RandomTape::uniform: range must be >= 1");
    if (range == 1) return 0;
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % range;
    for (std::uint64_t attempt = 0;; ++attempt) {
      const std::uint64_t x = word(key, attempt);
      if (x < limit) return x % range;
    }
  }

 private:
  constexpr std::uint64_t word(const DrawKey& key, std::uint64_t attempt) const noexcept {
    std::uint64_t h = mix64(seed_ ^ 0x5851f42d4c957f2dULL);
    h = mix64(h ^ fnv1a(key.tag));
    h = mix64(h ^ key.id);
    h = mix64(h ^ key.index);
    return mix64(h ^ attempt);
  }

  std::uint64_t seed_;
};

// derive_uniform(tape, key, range): free-function spelling used by the CLI
// and tests.
inline std::uint64_t derive_uniform(const RandomTape& tape, const DrawKey& key, std::uint64_t range) {
  return tape.uniform(key, range);
}

}  // namespace lcmd
