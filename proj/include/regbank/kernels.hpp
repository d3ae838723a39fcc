#pragma once

// Data-parallel hot loops. Each kernel has an OpenMP version (namespace
// kernels) and a plain serial version (namespace reference) that the tests
// and the benchmark compare against. Parallel versions never reorder a
// floating-point reduction across threads, so results do not depend on the
// thread count.

#include <span>
#include <vector>

#include "regbank/common.hpp"
#include "regbank/regforest.hpp"
#include "regbank/svm.hpp"

namespace regbank {

/// One (segment, tree) vote: a weighted pair of Gaussians on the time grid.
struct BoundaryVote {
  double weight = 0.0;
  double onset_center = 0.0;
  double onset_variance = 1.0;
  double offset_center = 0.0;
  double offset_variance = 1.0;
};

namespace kernels {

inline constexpr std::size_t kVoteBlock = 64;

/// Adds weight * N(n; mean, variance) for n in [lo, hi) to out[n]. Agrees
/// with direct evaluation to a few ulps per step from the mean.
void add_gaussian_block(double weight, double mean, double variance, std::size_t lo, std::size_t hi,
                        std::vector<double>& out);

/// Split cost of every pool test on the node; +inf when a side is empty.
std::vector<double> split_costs(std::span<const SplitTest> pool, const RegressionSet& data,
                                std::span<const std::size_t> node);

/// f(n) = sum_v weight_v * N(n; center_v, variance_v) for n in [0, grid),
/// evaluated per fixed-size grid block.
void accumulate_votes(std::span<const BoundaryVote> votes, std::size_t grid,
                      std::vector<double>& onset, std::vector<double>& offset);

Matrix gram_matrix(std::span<const EventChannels> a, std::span<const EventChannels> b, const KernelSpec& spec);

/// Symmetric Gram matrix of one sample set.
Matrix gram_matrix(std::span<const EventChannels> samples, const KernelSpec& spec);

/// Nearest centroid per point, ties to the lowest index.
std::vector<std::size_t> nearest_centroids(const Matrix& points, const Matrix& centroids);

}  // namespace kernels

namespace reference {

std::vector<double> split_costs(std::span<const SplitTest> pool, const RegressionSet& data,
                                std::span<const std::size_t> node);
void accumulate_votes(std::span<const BoundaryVote> votes, std::size_t grid,
                      std::vector<double>& onset, std::vector<double>& offset);
Matrix gram_matrix(std::span<const EventChannels> a, std::span<const EventChannels> b, const KernelSpec& spec);
Matrix gram_matrix(std::span<const EventChannels> samples, const KernelSpec& spec);
std::vector<std::size_t> nearest_centroids(const Matrix& points, const Matrix& centroids);

}  // namespace reference

}  // namespace regbank
