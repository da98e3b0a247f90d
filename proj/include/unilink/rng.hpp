#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace unilink {

// All randomness in the toolkit flows through this engine so that a single
// seed reproduces a whole run. std::mt19937_64 output is fully specified by
// the standard; the shuffle below avoids std::shuffle, whose exact sequence
// of engine calls is implementation-defined.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

// Unbiased draw from [0, bound) by rejection sampling.
inline std::uint64_t draw_below(Rng& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % bound;
  std::uint64_t value;
  do {
    value = rng();
  } while (value >= limit);
  return value % bound;
}

// Fisher-Yates with a pinned call sequence: identical seeds give identical
// permutations on every platform.
template <typename T>
void deterministic_shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(draw_below(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

// [0, 1, ..., n-1] shuffled.
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed);

}  // namespace unilink
