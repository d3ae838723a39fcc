#include "regbank/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "regbank/parallel.hpp"
#include "regbank/random.hpp"

namespace regbank {

namespace {

struct GiniSplit {
  SplitTest test;
  double impurity = std::numeric_limits<double>::infinity();
};

// Sum over both sides of n_side - sum_c count_c^2 / n_side, i.e. the
// sample-weighted Gini impurity.
double side_impurity(const std::vector<double>& counts, double n) {
  if (n == 0) return 0.0;
  double sq = 0.0;
  for (double c : counts) sq += c * c;
  return n - sq / n;
}

// Rows carry bootstrap multiplicities, so duplicates are sorted once but
// counted as often as they were drawn.
struct Scratch {
  double value;
  ClassId label;
  std::uint32_t weight;

  bool operator<(const Scratch& o) const { return value < o.value || (value == o.value && label < o.label); }
};

GiniSplit best_split_on_channel(const Matrix& x, std::span<const ClassId> y, std::span<const std::uint32_t> weight,
                                std::size_t n_classes, const std::vector<std::size_t>& rows, std::size_t channel,
                                std::vector<Scratch>& scratch) {
  scratch.clear();
  for (std::size_t r : rows) scratch.push_back({x(r, channel), y[r], weight[r]});
  std::sort(scratch.begin(), scratch.end());
  GiniSplit best;
  if (scratch.front().value == scratch.back().value) return best;

  std::vector<double> left(n_classes, 0.0), right(n_classes, 0.0);
  double total = 0.0;
  for (const auto& s : scratch) {
    right[static_cast<std::size_t>(s.label)] += s.weight;
    total += s.weight;
  }
  double n_left = 0.0;
  for (std::size_t i = 0; i + 1 < scratch.size(); ++i) {
    const auto c = static_cast<std::size_t>(scratch[i].label);
    left[c] += scratch[i].weight;
    right[c] -= scratch[i].weight;
    n_left += scratch[i].weight;
    const double v = scratch[i].value, next = scratch[i + 1].value;
    if (v == next) continue;
    const double impurity = side_impurity(left, n_left) + side_impurity(right, total - n_left);
    if (impurity < best.impurity) {
      double tau = v + (next - v) / 2.0;
      if (!(tau < next)) tau = v;
      best.impurity = impurity;
      best.test = {static_cast<int>(channel), tau};
    }
  }
  return best;
}

ClassificationTree grow_classification_tree(const Matrix& x, std::span<const ClassId> y,
                                            std::span<const std::uint32_t> weight, std::size_t n_classes,
                                            std::vector<std::size_t> rows, const MatcherConfig& cfg, Rng& rng) {
  ClassificationTree tree;
  const std::size_t dim = x.cols();
  const std::size_t mtry = cfg.features_per_split > 0
                               ? std::min<std::size_t>(static_cast<std::size_t>(cfg.features_per_split), dim)
                               : std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(dim))));

  struct Pending {
    std::int32_t node;
    int depth;
    std::vector<std::size_t> rows;
  };
  std::vector<Pending> stack;
  tree.nodes.push_back({});
  stack.push_back({0, 0, std::move(rows)});
  std::vector<Scratch> scratch;
  std::vector<std::size_t> channels(dim);

  auto make_leaf = [&](std::int32_t node, const std::vector<std::size_t>& members) {
    const std::size_t leaf = tree.leaf_counts.size() / n_classes;
    tree.leaf_counts.resize(tree.leaf_counts.size() + n_classes, 0);
    for (std::size_t r : members) tree.leaf_counts[leaf * n_classes + static_cast<std::size_t>(y[r])] += weight[r];
    tree.nodes[static_cast<std::size_t>(node)].leaf = static_cast<std::int32_t>(leaf);
  };

  while (!stack.empty()) {
    Pending item = std::move(stack.back());
    stack.pop_back();
    const bool pure = std::all_of(item.rows.begin(), item.rows.end(),
                                  [&](std::size_t r) { return y[r] == y[item.rows.front()]; });
    std::size_t drawn = 0;
    for (std::size_t r : item.rows) drawn += weight[r];
    if (pure || drawn < cfg.min_samples_split || item.depth >= cfg.max_depth) {
      make_leaf(item.node, item.rows);
      continue;
    }
    // Visit channels in random order; keep searching past mtry only while no
    // channel has produced a valid split.
    std::iota(channels.begin(), channels.end(), std::size_t{0});
    shuffle(rng, channels);
    GiniSplit best;
    for (std::size_t k = 0; k < dim; ++k) {
      if (k >= mtry && std::isfinite(best.impurity)) break;
      GiniSplit s = best_split_on_channel(x, y, weight, n_classes, item.rows, channels[k], scratch);
      if (s.impurity < best.impurity) best = s;
    }
    if (!std::isfinite(best.impurity)) {
      make_leaf(item.node, item.rows);
      continue;
    }
    std::vector<std::size_t> left, right;
    for (std::size_t r : item.rows) (apply_test(best.test, x.row(r)) ? right : left).push_back(r);
    const auto left_id = static_cast<std::int32_t>(tree.nodes.size());
    ClassificationNode& node = tree.nodes[static_cast<std::size_t>(item.node)];
    node.test = best.test;
    node.left = left_id;
    node.right = left_id + 1;
    tree.nodes.push_back({});
    tree.nodes.push_back({});
    stack.push_back({left_id + 1, item.depth + 1, std::move(right)});
    stack.push_back({left_id, item.depth + 1, std::move(left)});
  }
  return tree;
}

}  // namespace

MatcherModel train_matcher(const Matrix& features, std::span<const ClassId> labels, std::size_t n_classes,
                           const MatcherConfig& cfg) {
  if (features.rows() != labels.size())
    throw Error(ErrorCode::LengthMismatch, "features and labels differ in length");
  if (cfg.n_trees < 1) throw Error(ErrorCode::InvalidArgument, "matcher needs at least one tree");
  std::vector<bool> present(n_classes, false);
  for (ClassId c : labels) {
    if (c < 0 || static_cast<std::size_t>(c) >= n_classes)
      throw Error(ErrorCode::InvalidArgument, "label " + std::to_string(c) + " out of range");
    present[static_cast<std::size_t>(c)] = true;
  }
  if (std::count(present.begin(), present.end(), true) < 2)
    throw Error(ErrorCode::SingleClass, "matcher training data holds fewer than two classes");

  MatcherModel model;
  model.n_classes = n_classes;
  model.feature_dim = features.cols();
  model.config = cfg;
  model.trees.resize(static_cast<std::size_t>(cfg.n_trees));
  const std::size_t n = features.rows();

  parallel_for(model.trees.size(), [&](std::size_t t) {
    Rng rng = make_stream(cfg.seed, t);
    std::vector<std::uint32_t> drawn(n, 0);
    for (std::size_t i = 0; i < n; ++i) ++drawn[uniform_index(rng, n)];
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < n; ++r)
      if (drawn[r] > 0) rows.push_back(r);
    model.trees[t] = grow_classification_tree(features, labels, drawn, n_classes, std::move(rows), cfg, rng);
  });
  return model;
}

MatcherModel train_matcher(std::span<const LabeledEvent> events, std::size_t n_classes, const MatcherConfig& cfg) {
  Matrix x;
  std::vector<ClassId> y;
  for (const LabeledEvent& e : events) {
    for (std::size_t i = 0; i < e.segments.rows(); ++i) {
      x.append_row(e.segments.row(i));
      y.push_back(e.label);
    }
  }
  return train_matcher(x, y, n_classes, cfg);
}

std::span<const std::uint32_t> leaf_histogram(const ClassificationTree& tree, std::size_t n_classes,
                                              std::span<const double> x) {
  std::size_t i = 0;
  while (!tree.nodes[i].is_leaf()) {
    const ClassificationNode& node = tree.nodes[i];
    i = static_cast<std::size_t>(apply_test(node.test, x) ? node.right : node.left);
  }
  return {tree.leaf_counts.data() + static_cast<std::size_t>(tree.nodes[i].leaf) * n_classes, n_classes};
}

std::vector<double> posterior(const MatcherModel& m, std::span<const double> x) {
  if (x.size() != m.feature_dim)
    throw Error(ErrorCode::DimensionMismatch, "segment of dimension " + std::to_string(x.size()) +
                                                  ", matcher expects " + std::to_string(m.feature_dim));
  std::vector<double> p(m.n_classes, 0.0);
  for (const ClassificationTree& tree : m.trees) {
    const auto hist = leaf_histogram(tree, m.n_classes, x);
    double total = 0.0;
    for (auto c : hist) total += c;
    for (std::size_t c = 0; c < m.n_classes; ++c) p[c] += hist[c] / total;
  }
  for (double& v : p) v /= static_cast<double>(m.trees.size());
  return p;
}

Matrix posteriors(const MatcherModel& m, const Matrix& segments) {
  Matrix out(segments.rows(), m.n_classes);
  if (segments.cols() != m.feature_dim && !segments.empty())
    throw Error(ErrorCode::DimensionMismatch, "segments do not match the matcher dimension");
  parallel_for(segments.rows(), [&](std::size_t i) {
    const auto p = posterior(m, segments.row(i));
    std::copy(p.begin(), p.end(), out.row(i).begin());
  });
  return out;
}

std::vector<std::size_t> assign_folds(std::span<const LabeledEvent> events, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "fold count must be positive");
  if (events.size() < k)
    throw Error(ErrorCode::TooFewEvents, std::to_string(events.size()) + " events for " + std::to_string(k) + " folds");
  ClassId max_label = 0;
  for (const auto& e : events) max_label = std::max(max_label, e.label);
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(max_label) + 1);
  for (std::size_t i = 0; i < events.size(); ++i) by_class[static_cast<std::size_t>(events[i].label)].push_back(i);

  Rng rng = make_stream(seed, 0x666f6c64);
  std::vector<std::size_t> fold(events.size());
  std::size_t deal = 0;
  for (auto& members : by_class) {
    shuffle(rng, members);
    for (std::size_t idx : members) fold[idx] = deal++ % k;
  }
  return fold;
}

FoldedMatchers train_folded_matchers(std::span<const LabeledEvent> events, std::size_t n_classes, std::size_t k,
                                     const MatcherConfig& cfg) {
  FoldedMatchers folded;
  folded.event_fold = assign_folds(events, k, cfg.seed);
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<LabeledEvent> rest;
    for (std::size_t i = 0; i < events.size(); ++i)
      if (folded.event_fold[i] != f) rest.push_back(events[i]);
    MatcherConfig fold_cfg = cfg;
    fold_cfg.seed = mix64(cfg.seed ^ mix64(f + 1));
    folded.models.push_back(train_matcher(rest, n_classes, fold_cfg));
  }
  return folded;
}

}  // namespace regbank
