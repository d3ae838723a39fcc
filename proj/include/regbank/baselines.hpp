#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "regbank/common.hpp"

namespace regbank {

struct Codebook {
  Matrix centroids;  // V x dim

  std::size_t size() const { return centroids.rows(); }
  bool operator==(const Codebook&) const = default;
};

struct KMeansResult {
  Codebook codebook;
  std::vector<double> inertia;  // per completed Lloyd iteration
  std::size_t iterations = 0;
};

/// k-means++ seeding then Lloyd iterations until the assignment stops
/// changing or max_iters is reached. An emptied cluster is re-seeded at the
/// point farthest from its current centroid.
KMeansResult kmeans_fit(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t max_iters = 100);

Codebook kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t max_iters = 100);

/// l1-normalized histogram of nearest-centroid assignments.
std::vector<double> bow_encode(const Matrix& segments, const Codebook& codebook);

/// Temporal pyramid: level l has 2^l contiguous cells (earlier cells take the
/// remainder). Per-cell l1 histograms, each multiplied by `level_weights[l]`
/// when given, concatenated and l1-normalized. Dimension V * (2^L - 1).
std::vector<double> pbow_encode(const Matrix& segments, const Codebook& codebook, int levels,
                                std::span<const double> level_weights = {});

/// Argmax over the raw bank responses; ties to the lowest class id.
ClassId max_vote(std::span<const double> raw_phi);

/// Per-channel mean and standard deviation, applied before codebook
/// learning so no channel dominates the Euclidean distance.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  Matrix apply(const Matrix& x) const;
  bool operator==(const Standardizer&) const = default;
};

Standardizer fit_standardizer(const Matrix& x);

}  // namespace regbank
