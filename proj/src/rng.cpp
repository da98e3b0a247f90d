#include "unilink/rng.hpp"

#include <numeric>

namespace unilink {

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> indices(n);
  std::iota(indices.begin(), indices.end(), std::size_t{0});
  Rng rng = make_rng(seed);
  deterministic_shuffle(indices, rng);
  return indices;
}

}  // namespace unilink
