#pragma once

#include <cstdint>
#include <random>

namespace mcoce {

using Rng = std::mt19937_64;

/// Purpose tags for derived random substreams. Each consumer of randomness
/// draws from its own stream so that adding a consumer (e.g. cross-validation)
/// never shifts the numbers seen by another (e.g. population sampling).
enum class StreamTag : std::uint64_t {
  Init = 1,
  Population = 2,
  Components = 3,
  Folds = 4,
  CvFit = 5,
  FinalFit = 6,
  Trial = 7,
  Lab = 8,
};

std::uint64_t splitmix64(std::uint64_t x);

/// Mixes a parent seed with up to three keys into a child seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0);

inline Rng substream(std::uint64_t seed, std::uint64_t t, StreamTag tag,
                     std::uint64_t extra = 0) {
  return Rng(derive_seed(seed, t, static_cast<std::uint64_t>(tag), extra));
}

}  // namespace mcoce
