#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace regbank {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Engine for stream `stream` of a seeded family. The result depends only on
/// (seed, stream), never on the order streams are created, so per-tree or
/// per-fold work can run in any order and still reproduce.
Rng make_stream(std::uint64_t seed, std::uint64_t stream);
Rng make_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream);

// The distributions below are spelled out rather than taken from <random>,
// whose distribution algorithms differ between standard libraries.

/// Uniform double in [0, 1).
double uniform01(Rng& rng);

/// Uniform double in [lo, hi]; returns lo when lo == hi.
double uniform_real(Rng& rng, double lo, double hi);

/// Uniform integer in [0, n). n must be positive.
std::size_t uniform_index(Rng& rng, std::size_t n);

/// Standard normal deviate (Box-Muller, one value per call).
double standard_normal(Rng& rng);

/// k distinct indices from [0, n), sorted ascending (partial Fisher-Yates).
std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n, std::size_t k);

/// In-place Fisher-Yates shuffle.
template <typename T>
void shuffle(Rng& rng, std::vector<T>& values) {
  for (std::size_t i = values.size(); i > 1; --i) {
    std::size_t j = uniform_index(rng, i);
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace regbank
