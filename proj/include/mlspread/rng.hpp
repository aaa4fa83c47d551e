#pragma once

// Counter-based randomness: every stochastic decision in a run is a pure
// function of a structured key, so results do not depend on the order in
// which trials are evaluated or on how runs are scheduled across threads.

#include <cstdint>
#include <string_view>

namespace mlspread {

enum class Channel : std::uint32_t {
  Infection = 1,
  Recovery = 2,
  AwarenessEdge = 3,
  Forgetting = 4,
  SymptomAwareness = 5,
  InfectedSeed = 6,
  AwareSeed = 7,
  Topology = 8,
};

inline constexpr std::uint32_t kNoId = 0xffffffffu;

struct EventKey {
  std::uint64_t run_seed = 0;
  std::uint32_t iteration = 0;
  Channel channel = Channel::Infection;
  std::uint32_t first = kNoId;
  std::uint32_t second = kNoId;
  std::uint32_t layer = kNoId;

  friend constexpr bool operator==(const EventKey&, const EventKey&) = default;
};

namespace detail {

// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t absorb(std::uint64_t state, std::uint64_t word) noexcept {
  return mix64(state ^ mix64(word));
}

}  // namespace detail

constexpr std::uint64_t hash_key(const EventKey& key) noexcept {
  std::uint64_t h = detail::mix64(key.run_seed);
  h = detail::absorb(h, (std::uint64_t{key.iteration} << 32) | static_cast<std::uint32_t>(key.channel));
  h = detail::absorb(h, (std::uint64_t{key.first} << 32) | key.second);
  h = detail::absorb(h, key.layer);
  return h;
}

/// Uniform double in [0, 1) with 53 random bits derived from the key.
constexpr double event_uniform(const EventKey& key) noexcept {
  return static_cast<double>(hash_key(key) >> 11) * 0x1.0p-53;
}

/// True iff the key's uniform falls below p. p <= 0 never fires, p >= 1 always does.
constexpr bool event_bernoulli(const EventKey& key, double p) noexcept {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return event_uniform(key) < p;
}

/// Order-sensitive combination of 64-bit words into one seed.
template <typename... Words>
constexpr std::uint64_t combine_seed(std::uint64_t first, Words... rest) noexcept {
  std::uint64_t h = detail::mix64(first);
  ((h = detail::absorb(h, static_cast<std::uint64_t>(rest))), ...);
  return h;
}

/// FNV-1a; stable across platforms, used to fold text identifiers into seeds.
constexpr std::uint64_t hash_text(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace mlspread
