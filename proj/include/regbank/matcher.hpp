#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "regbank/common.hpp"
#include "regbank/regforest.hpp"

namespace regbank {

struct MatcherConfig {
  int n_trees = 200;
  int features_per_split = 0;  // 0 = floor(sqrt(dim))
  int max_depth = 64;
  std::size_t min_samples_split = 2;
  std::uint64_t seed = 0;

  bool operator==(const MatcherConfig&) const = default;
};

struct ClassificationNode {
  SplitTest test;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::int32_t leaf = -1;  // row into the tree's leaf histogram table

  bool is_leaf() const { return leaf >= 0; }
  bool operator==(const ClassificationNode&) const = default;
};

struct ClassificationTree {
  std::vector<ClassificationNode> nodes;
  std::vector<std::uint32_t> leaf_counts;  // n_leaves x n_classes, row-major

  bool operator==(const ClassificationTree&) const = default;
};

/// Random-forest segment classifier providing P(c | x).
struct MatcherModel {
  std::size_t n_classes = 0;
  std::size_t feature_dim = 0;
  MatcherConfig config;
  std::vector<ClassificationTree> trees;

  bool operator==(const MatcherModel&) const = default;
};

/// Gini-split random forest with per-tree bootstrap samples. Class ids must
/// lie in [0, n_classes); at least two must be present.
MatcherModel train_matcher(const Matrix& features, std::span<const ClassId> labels, std::size_t n_classes,
                           const MatcherConfig& cfg);

/// Segments of the given events stacked, labeled by their event.
MatcherModel train_matcher(std::span<const LabeledEvent> events, std::size_t n_classes, const MatcherConfig& cfg);

/// Leaf reached by x, as a span of per-class counts.
std::span<const std::uint32_t> leaf_histogram(const ClassificationTree& tree, std::size_t n_classes,
                                              std::span<const double> x);

/// Mean over trees of the leaf class fractions.
std::vector<double> posterior(const MatcherModel& m, std::span<const double> x);

/// Posterior rows for every segment of `segments`.
Matrix posteriors(const MatcherModel& m, const Matrix& segments);

struct FoldedMatchers {
  std::vector<MatcherModel> models;       // model k never saw fold k
  std::vector<std::size_t> event_fold;    // per training event

  const MatcherModel& for_event(std::size_t event_index) const { return models[event_fold[event_index]]; }
};

/// Class-stratified fold ids: per class the events are shuffled and dealt
/// round-robin, continuing the deal across classes.
std::vector<std::size_t> assign_folds(std::span<const LabeledEvent> events, std::size_t k, std::uint64_t seed);

FoldedMatchers train_folded_matchers(std::span<const LabeledEvent> events, std::size_t n_classes, std::size_t k,
                                     const MatcherConfig& cfg);

}  // namespace regbank
