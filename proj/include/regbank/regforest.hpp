#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "regbank/common.hpp"
#include "regbank/random.hpp"

namespace regbank {

/// Segment distances to the event's first (onset) and last (offset)
/// segment, in segment-index units.
struct BoundaryDistance {
  double onset = 0.0;
  double offset = 0.0;
};

/// Segments of all events of one class, rows aligned with `distances`.
struct RegressionSet {
  Matrix features;
  std::vector<BoundaryDistance> distances;
  ClassId class_id = 0;

  std::size_t size() const { return distances.size(); }
};

/// One event's segment features plus its label.
struct LabeledEvent {
  std::string id;
  ClassId label = 0;
  Matrix segments;
};

RegressionSet build_regression_training_set(std::span<const LabeledEvent> events, ClassId class_id);

struct SplitTest {
  int channel = 0;
  double threshold = 0.0;

  bool operator==(const SplitTest&) const = default;
};

/// 1 (go right) iff x[channel] > threshold.
inline bool apply_test(const SplitTest& t, std::span<const double> x) {
  return x[static_cast<std::size_t>(t.channel)] > t.threshold;
}

/// Tests with uniform channel and threshold uniform in the channel's range
/// over the node's samples.
std::vector<SplitTest> sample_test_pool(Rng& rng, const Matrix& features,
                                        std::span<const std::size_t> node, std::size_t pool_size);

/// Sum over both sides of squared deviations from the side mean.
double split_cost(std::span<const BoundaryDistance> left, std::span<const BoundaryDistance> right);

struct SplitChoice {
  SplitTest test;
  std::size_t pool_index = 0;
  double cost = 0.0;
};

/// Minimum-cost test among those leaving both sides non-empty; ties go to the
/// lowest pool index. nullopt when no test separates the node.
std::optional<SplitChoice> select_best_test(std::span<const SplitTest> pool, const RegressionSet& data,
                                            std::span<const std::size_t> node);

struct LeafModel {
  double mean_onset = 0.0;
  double var_onset = 1.0;
  double mean_offset = 0.0;
  double var_offset = 1.0;
  std::size_t count = 0;

  bool operator==(const LeafModel&) const = default;
};

LeafModel fit_leaf(std::span<const BoundaryDistance> data, double min_variance);

struct RegressionTreeNode {
  SplitTest test;
  std::int32_t left = -1;   // child index, -1 on leaves
  std::int32_t right = -1;
  std::int32_t leaf = -1;   // index into leaves, -1 on split nodes
  std::int32_t depth = 0;

  bool is_leaf() const { return leaf >= 0; }
  bool operator==(const RegressionTreeNode&) const = default;
};

struct RegressionTree {
  std::vector<RegressionTreeNode> nodes;  // nodes[0] is the root
  std::vector<LeafModel> leaves;

  bool operator==(const RegressionTree&) const = default;
};

struct RegressionForestConfig {
  int n_trees = 10;
  int max_depth = 12;
  std::size_t min_samples = 20;
  std::size_t tests_per_node = 20000;
  double subsample_fraction = 0.5;
  double min_variance = 1.0;
  std::uint64_t seed = 0;

  bool operator==(const RegressionForestConfig&) const = default;
};

RegressionTree grow_tree(const RegressionSet& data, std::span<const std::size_t> rows,
                         const RegressionForestConfig& cfg, Rng& rng);

struct RegressorForest {
  ClassId class_id = 0;
  std::size_t feature_dim = 0;
  RegressionForestConfig config;
  std::vector<RegressionTree> trees;

  bool operator==(const RegressorForest&) const = default;
};

/// Rows each tree of train_forest was grown on.
std::vector<std::size_t> tree_subsample(std::size_t n_rows, const RegressionForestConfig& cfg, int tree_index);

RegressorForest train_forest(std::span<const LabeledEvent> events, ClassId class_id,
                             const RegressionForestConfig& cfg);
RegressorForest train_forest(const RegressionSet& data, const RegressionForestConfig& cfg);

const LeafModel& route(const RegressionTree& tree, std::span<const double> x);

/// Gaussian density with the given variance at point v.
double gaussian_pdf(double v, double mean, double variance);

struct BoundaryDensity {
  std::vector<double> onset;   // p+(n), n = 0..grid-1
  std::vector<double> offset;  // p-(n)
};

/// Forest-averaged onset/offset densities for a segment at index `position`,
/// evaluated on integer grid points [0, grid_size).
BoundaryDensity forest_estimate(const RegressorForest& forest, std::span<const double> x,
                                double position, std::size_t grid_size);

}  // namespace regbank
