#include "regbank/regforest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "regbank/kernels.hpp"
#include "regbank/parallel.hpp"

namespace regbank {

RegressionSet build_regression_training_set(std::span<const LabeledEvent> events, ClassId class_id) {
  RegressionSet set;
  set.class_id = class_id;
  for (const LabeledEvent& event : events) {
    if (event.label != class_id) continue;
    const std::size_t n = event.segments.rows();
    if (n == 0) throw Error(ErrorCode::EmptyEvent, "event '" + event.id + "' has no segments");
    for (std::size_t i = 0; i < n; ++i) {
      set.features.append_row(event.segments.row(i));
      set.distances.push_back({static_cast<double>(i), static_cast<double>(n - 1 - i)});
    }
  }
  if (set.distances.empty())
    throw Error(ErrorCode::EmptyClass, "no training events for class " + std::to_string(class_id));
  return set;
}

std::vector<SplitTest> sample_test_pool(Rng& rng, const Matrix& features,
                                        std::span<const std::size_t> node, std::size_t pool_size) {
  if (node.empty()) throw Error(ErrorCode::InvalidArgument, "test pool for an empty node");
  const std::size_t dim = features.cols();
  std::vector<double> lo(dim, std::numeric_limits<double>::infinity());
  std::vector<double> hi(dim, -std::numeric_limits<double>::infinity());
  for (std::size_t row : node) {
    const auto x = features.row(row);
    for (std::size_t c = 0; c < dim; ++c) {
      lo[c] = std::min(lo[c], x[c]);
      hi[c] = std::max(hi[c], x[c]);
    }
  }
  std::vector<SplitTest> pool(pool_size);
  for (SplitTest& t : pool) {
    const std::size_t c = uniform_index(rng, dim);
    t.channel = static_cast<int>(c);
    t.threshold = uniform_real(rng, lo[c], hi[c]);
  }
  return pool;
}

double split_cost(std::span<const BoundaryDistance> left, std::span<const BoundaryDistance> right) {
  if (left.empty() || right.empty()) throw Error(ErrorCode::EmptySide, "split leaves a side empty");
  auto scatter = [](std::span<const BoundaryDistance> side) {
    double on = 0.0, off = 0.0;
    for (const auto& d : side) {
      on += d.onset;
      off += d.offset;
    }
    on /= static_cast<double>(side.size());
    off /= static_cast<double>(side.size());
    double s = 0.0;
    for (const auto& d : side) s += (d.onset - on) * (d.onset - on) + (d.offset - off) * (d.offset - off);
    return s;
  };
  return scatter(left) + scatter(right);
}

std::optional<SplitChoice> select_best_test(std::span<const SplitTest> pool, const RegressionSet& data,
                                            std::span<const std::size_t> node) {
  if (pool.empty()) throw Error(ErrorCode::InvalidArgument, "empty test pool");
  const auto costs = kernels::split_costs(pool, data, node);
  std::optional<SplitChoice> best;
  for (std::size_t i = 0; i < costs.size(); ++i) {
    if (std::isinf(costs[i])) continue;
    if (!best || costs[i] < best->cost) best = SplitChoice{pool[i], i, costs[i]};
  }
  return best;
}

LeafModel fit_leaf(std::span<const BoundaryDistance> data, double min_variance) {
  if (data.empty()) throw Error(ErrorCode::InvalidArgument, "leaf without samples");
  LeafModel leaf;
  leaf.count = data.size();
  const double n = static_cast<double>(data.size());
  for (const auto& d : data) {
    leaf.mean_onset += d.onset;
    leaf.mean_offset += d.offset;
  }
  leaf.mean_onset /= n;
  leaf.mean_offset /= n;
  double v_on = 0.0, v_off = 0.0;
  for (const auto& d : data) {
    v_on += (d.onset - leaf.mean_onset) * (d.onset - leaf.mean_onset);
    v_off += (d.offset - leaf.mean_offset) * (d.offset - leaf.mean_offset);
  }
  leaf.var_onset = std::max(v_on / n, min_variance);
  leaf.var_offset = std::max(v_off / n, min_variance);
  return leaf;
}

RegressionTree grow_tree(const RegressionSet& data, std::span<const std::size_t> rows,
                         const RegressionForestConfig& cfg, Rng& rng) {
  if (rows.empty()) throw Error(ErrorCode::InvalidArgument, "tree over an empty sample");
  RegressionTree tree;

  struct Pending {
    std::int32_t node;
    std::vector<std::size_t> rows;
  };
  std::vector<Pending> stack;
  tree.nodes.push_back({});
  stack.push_back({0, {rows.begin(), rows.end()}});

  auto make_leaf = [&](std::int32_t node, const std::vector<std::size_t>& members) {
    std::vector<BoundaryDistance> d;
    d.reserve(members.size());
    for (std::size_t r : members) d.push_back(data.distances[r]);
    tree.nodes[static_cast<std::size_t>(node)].leaf = static_cast<std::int32_t>(tree.leaves.size());
    tree.leaves.push_back(fit_leaf(d, cfg.min_variance));
  };

  // Depth-first, left child first, so node numbering is a fixed function of
  // the RNG stream.
  while (!stack.empty()) {
    Pending item = std::move(stack.back());
    stack.pop_back();
    const int depth = tree.nodes[static_cast<std::size_t>(item.node)].depth;
    if (depth >= cfg.max_depth || item.rows.size() <= cfg.min_samples) {
      make_leaf(item.node, item.rows);
      continue;
    }
    const auto pool = sample_test_pool(rng, data.features, item.rows, cfg.tests_per_node);
    const auto choice = select_best_test(pool, data, item.rows);
    if (!choice) {
      make_leaf(item.node, item.rows);
      continue;
    }
    std::vector<std::size_t> left, right;
    for (std::size_t r : item.rows) (apply_test(choice->test, data.features.row(r)) ? right : left).push_back(r);

    const auto left_id = static_cast<std::int32_t>(tree.nodes.size());
    const auto right_id = left_id + 1;
    {
      RegressionTreeNode& node = tree.nodes[static_cast<std::size_t>(item.node)];
      node.test = choice->test;
      node.left = left_id;
      node.right = right_id;
    }
    RegressionTreeNode child;
    child.depth = depth + 1;
    tree.nodes.push_back(child);
    tree.nodes.push_back(child);
    stack.push_back({right_id, std::move(right)});
    stack.push_back({left_id, std::move(left)});
  }
  return tree;
}

std::vector<std::size_t> tree_subsample(std::size_t n_rows, const RegressionForestConfig& cfg, int tree_index) {
  Rng rng = make_stream(cfg.seed, static_cast<std::uint64_t>(tree_index), 0);
  const auto k = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(cfg.subsample_fraction * static_cast<double>(n_rows))), 1, n_rows);
  return sample_without_replacement(rng, n_rows, k);
}

RegressorForest train_forest(const RegressionSet& data, const RegressionForestConfig& cfg) {
  if (data.size() == 0) throw Error(ErrorCode::EmptyClass, "no training segments");
  if (cfg.n_trees < 1) throw Error(ErrorCode::InvalidArgument, "forest needs at least one tree");
  RegressorForest forest;
  forest.class_id = data.class_id;
  forest.feature_dim = data.features.cols();
  forest.config = cfg;
  forest.trees.resize(static_cast<std::size_t>(cfg.n_trees));

  parallel_for(forest.trees.size(), [&](std::size_t t) {
    const auto rows = tree_subsample(data.size(), cfg, static_cast<int>(t));
    Rng rng = make_stream(cfg.seed, t, 1);
    forest.trees[t] = grow_tree(data, rows, cfg, rng);
  });
  return forest;
}

RegressorForest train_forest(std::span<const LabeledEvent> events, ClassId class_id,
                             const RegressionForestConfig& cfg) {
  return train_forest(build_regression_training_set(events, class_id), cfg);
}

const LeafModel& route(const RegressionTree& tree, std::span<const double> x) {
  std::size_t i = 0;
  while (!tree.nodes[i].is_leaf()) {
    const RegressionTreeNode& node = tree.nodes[i];
    i = static_cast<std::size_t>(apply_test(node.test, x) ? node.right : node.left);
  }
  return tree.leaves[static_cast<std::size_t>(tree.nodes[i].leaf)];
}

double gaussian_pdf(double v, double mean, double variance) {
  const double d = v - mean;
  return std::exp(-0.5 * d * d / variance) / std::sqrt(2.0 * std::numbers::pi * variance);
}

BoundaryDensity forest_estimate(const RegressorForest& forest, std::span<const double> x,
                                double position, std::size_t grid_size) {
  BoundaryDensity out{std::vector<double>(grid_size, 0.0), std::vector<double>(grid_size, 0.0)};
  const double inv_t = 1.0 / static_cast<double>(forest.trees.size());
  for (const RegressionTree& tree : forest.trees) {
    const LeafModel& leaf = route(tree, x);
    for (std::size_t n = 0; n < grid_size; ++n) {
      const double g = static_cast<double>(n);
      out.onset[n] += gaussian_pdf(g, position - leaf.mean_onset, leaf.var_onset);
      out.offset[n] += gaussian_pdf(g, position + leaf.mean_offset, leaf.var_offset);
    }
  }
  for (std::size_t n = 0; n < grid_size; ++n) {
    out.onset[n] *= inv_t;
    out.offset[n] *= inv_t;
  }
  return out;
}

}  // namespace regbank
