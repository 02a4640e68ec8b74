#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <utility>
#include <vector>

namespace supernova {

// Draw domains. Every random decision is keyed by (seed, domain, ids) so that
// results never depend on evaluation order and compared runs share draws.
enum class Domain : std::uint64_t {
  kBehavior = 1,
  kDeviationSplit,
  kDeviation,
  kFriendAccept,
  kStrangerPool,
  kStrangerWilling,
  kPairingOrder,
  kWorkload,
  kGraph,
};

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Folds one more id into a key hash; key_hash(s, d, {a, b}) equals
// key_extend(key_hash(s, d, {a}), b).
inline std::uint64_t key_extend(std::uint64_t h, std::uint64_t id) {
  return mix64(h ^ mix64(id + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t key_hash(std::uint64_t seed, Domain domain,
                              std::initializer_list<std::uint64_t> ids) {
  std::uint64_t h = mix64(seed ^ mix64(static_cast<std::uint64_t>(domain)));
  for (std::uint64_t id : ids) h = key_extend(h, id);
  return h;
}

inline double hash_to_unit(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

// Uniform in [0, 1) from the top 53 bits of a keyed hash.
inline double key_uniform(std::uint64_t seed, Domain domain,
                          std::initializer_list<std::uint64_t> ids) {
  return hash_to_unit(key_hash(seed, domain, ids));
}

// Bernoulli draw with probability given in percent.
inline bool key_chance(double percent, std::uint64_t seed, Domain domain,
                       std::initializer_list<std::uint64_t> ids) {
  return key_uniform(seed, domain, ids) * 100.0 < percent;
}

// Sequential stream for a (seed, domain, id) triple.
inline std::mt19937_64 make_stream(std::uint64_t seed, Domain domain, std::uint64_t id = 0) {
  return std::mt19937_64(key_hash(seed, domain, {id}));
}

// Unbiased integer in [0, bound) without relying on library distributions,
// whose output differs between standard library implementations.
inline std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

inline double draw_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <typename T>
void shuffle_in_place(std::vector<T>& items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[draw_below(rng, i)]);
  }
}

}  // namespace supernova
