#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

#include "oracles.hpp"
#include "regbank/kernels.hpp"
#include "regbank/regforest.hpp"

using namespace regbank;

namespace {

LabeledEvent make_event(Rng& rng, std::size_t n, std::size_t dim, ClassId label = 0) {
  return {"e", label, oracle::random_matrix(rng, n, dim)};
}

RegressionSet random_set(Rng& rng, std::size_t n, std::size_t dim) {
  RegressionSet s;
  s.features = oracle::random_matrix(rng, n, dim);
  for (std::size_t i = 0; i < n; ++i)
    s.distances.push_back({static_cast<double>(uniform_index(rng, 30)), static_cast<double>(uniform_index(rng, 30))});
  return s;
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

// Exhaustive split cost of one test, two-pass scatter per side.
double oracle_cost(const SplitTest& t, const RegressionSet& data, std::span<const std::size_t> node, bool& valid) {
  std::vector<double> lon, loff, ron, roff;
  for (std::size_t r : node) {
    const bool right = data.features(r, static_cast<std::size_t>(t.channel)) > t.threshold;
    (right ? ron : lon).push_back(data.distances[r].onset);
    (right ? roff : loff).push_back(data.distances[r].offset);
  }
  valid = !lon.empty() && !ron.empty();
  return oracle::scatter(lon) + oracle::scatter(loff) + oracle::scatter(ron) + oracle::scatter(roff);
}

}  // namespace

TEST_CASE("regression training set distances") {
  Rng rng = make_stream(1, 0);
  std::vector<LabeledEvent> events{make_event(rng, 1, 3), make_event(rng, 5, 3), make_event(rng, 4, 3, 1)};
  const RegressionSet s = build_regression_training_set(events, 0);
  REQUIRE(s.size() == 6);
  CHECK(s.distances[0].onset == 0.0);
  CHECK(s.distances[0].offset == 0.0);
  CHECK(s.distances[1].onset == 0.0);
  CHECK(s.distances[1].offset == 4.0);
  CHECK(s.distances[3].onset == 2.0);
  CHECK(s.distances[3].offset == 2.0);
  for (std::size_t i = 1; i < 6; ++i) CHECK(s.distances[i].onset + s.distances[i].offset == 4.0);
  try {
    build_regression_training_set(events, 2);
    FAIL("expected EmptyClass");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyClass);
  }
}

TEST_CASE("test pool") {
  Rng rng = make_stream(2, 0);
  const Matrix x = oracle::random_matrix(rng, 40, 6);
  SUBCASE("count") { CHECK(sample_test_pool(rng, x, all_rows(40), 5).size() == 5); }
  SUBCASE("single sample gives degenerate thresholds") {
    const std::vector<std::size_t> node{7};
    for (const auto& t : sample_test_pool(rng, x, node, 50)) CHECK(t.threshold == x(7, static_cast<std::size_t>(t.channel)));
  }
  SUBCASE("thresholds within the node's channel range") {
    const std::vector<std::size_t> node{1, 4, 9, 16, 25, 36};
    for (const auto& t : sample_test_pool(rng, x, node, 500)) {
      const auto c = static_cast<std::size_t>(t.channel);
      double lo = INFINITY, hi = -INFINITY;
      for (std::size_t r : node) {
        lo = std::min(lo, x(r, c));
        hi = std::max(hi, x(r, c));
      }
      CHECK(t.channel >= 0);
      CHECK(t.channel < 6);
      CHECK(t.threshold >= lo);
      CHECK(t.threshold <= hi);
    }
  }
}

TEST_CASE("apply_test is a strict inequality") {
  const SplitTest t{1, 0.5};
  CHECK_FALSE(apply_test(t, std::vector<double>{9.0, 0.5}));
  CHECK(apply_test(t, std::vector<double>{9.0, 1.5}));
  CHECK_FALSE(apply_test(t, std::vector<double>{9.0, -0.5}));
}

TEST_CASE("split cost") {
  const std::vector<BoundaryDistance> left{{1, 2}, {3, 4}}, right{{5, 6}};
  CHECK(split_cost(left, right) == doctest::Approx(4.0));
  const std::vector<BoundaryDistance> same{{2, 3}, {2, 3}, {2, 3}};
  CHECK(split_cost(same, right) == 0.0);
  std::vector<BoundaryDistance> shuffled{{3, 4}, {1, 2}};
  CHECK(split_cost(shuffled, right) == split_cost(left, right));
  try {
    split_cost({}, right);
    FAIL("expected EmptySide");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptySide);
  }
}

TEST_CASE("select_best_test") {
  SUBCASE("single valid test") {
    RegressionSet s;
    s.features = Matrix(2, 1);
    s.features(1, 0) = 1.0;
    s.distances = {{0, 1}, {1, 0}};
    const std::vector<SplitTest> pool{{0, 0.5}};
    const auto choice = select_best_test(pool, s, all_rows(2));
    REQUIRE(choice);
    CHECK(choice->pool_index == 0);
  }
  SUBCASE("identical features have no valid split") {
    Rng rng = make_stream(3, 0);
    RegressionSet s;
    s.features = Matrix(10, 3, 0.25);
    s.distances.assign(10, {1, 2});
    const auto pool = sample_test_pool(rng, s.features, all_rows(10), 100);
    CHECK_FALSE(select_best_test(pool, s, all_rows(10)).has_value());
  }
  SUBCASE("ties go to the lowest pool index") {
    RegressionSet s;
    s.features = Matrix(4, 1);
    for (std::size_t i = 0; i < 4; ++i) s.features(i, 0) = static_cast<double>(i);
    s.distances = {{0, 0}, {0, 0}, {5, 5}, {5, 5}};
    const std::vector<SplitTest> pool{{0, 0.5}, {0, 1.2}, {0, 1.7}};
    CHECK(select_best_test(pool, s, all_rows(4))->pool_index == 1);
  }
  SUBCASE("agrees with exhaustive minimization") {
    Rng rng = make_stream(4, 0);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = 2 + uniform_index(rng, 49);
      const RegressionSet s = random_set(rng, n, 1 + uniform_index(rng, 8));
      std::vector<std::size_t> node;
      for (std::size_t i = 0; i < n; ++i)
        if (uniform01(rng) < 0.8) node.push_back(i);
      if (node.empty()) node.push_back(0);
      const auto pool = sample_test_pool(rng, s.features, node, 1 + uniform_index(rng, 200));
      double best = INFINITY;
      std::size_t best_index = pool.size();
      for (std::size_t t = 0; t < pool.size(); ++t) {
        bool valid = false;
        const double c = oracle_cost(pool[t], s, node, valid);
        if (valid && c < best) {
          best = c;
          best_index = t;
        }
      }
      const auto choice = select_best_test(pool, s, node);
      if (best_index == pool.size()) {
        CHECK_FALSE(choice.has_value());
        continue;
      }
      REQUIRE(choice.has_value());
      bool valid = false;
      const double chosen = oracle_cost(choice->test, s, node, valid);
      CHECK(valid);
      CHECK(chosen <= best + 1e-9 * std::max(1.0, best));
      CHECK(choice->cost == doctest::Approx(best).epsilon(1e-9));
    }
  }
}

TEST_CASE("fit_leaf") {
  const std::vector<BoundaryDistance> two{{2, 5}, {4, 5}};
  const LeafModel m = fit_leaf(two, 1.0);
  CHECK(m.mean_onset == 3.0);
  CHECK(m.var_onset == 1.0);
  CHECK(m.mean_offset == 5.0);
  CHECK(m.var_offset == 1.0);
  CHECK(m.count == 2);
  const std::vector<BoundaryDistance> wide{{0, 0}, {10, 4}};
  const LeafModel w = fit_leaf(wide, 1.0);
  CHECK(w.var_onset == doctest::Approx(25.0));
  CHECK(w.var_offset == doctest::Approx(4.0));
  const std::vector<BoundaryDistance> one{{7, 1}};
  CHECK(fit_leaf(one, 0.5).var_onset == 0.5);
}

TEST_CASE("grow_tree limits") {
  Rng rng = make_stream(5, 0);
  const RegressionSet s = random_set(rng, 60, 4);
  RegressionForestConfig cfg;
  cfg.tests_per_node = 200;
  SUBCASE("depth 0") {
    cfg.max_depth = 0;
    const auto tree = grow_tree(s, all_rows(60), cfg, rng);
    CHECK(tree.nodes.size() == 1);
    CHECK(tree.leaves.size() == 1);
    CHECK(tree.leaves[0].count == 60);
  }
  SUBCASE("N_min at least the data size") {
    cfg.min_samples = 60;
    CHECK(grow_tree(s, all_rows(60), cfg, rng).nodes.size() == 1);
  }
  SUBCASE("leaf checker") {
    for (int trial = 0; trial < 20; ++trial) {
      const RegressionSet d = random_set(rng, 30 + uniform_index(rng, 200), 3);
      cfg.max_depth = 1 + static_cast<int>(uniform_index(rng, 8));
      cfg.min_samples = 1 + uniform_index(rng, 20);
      const auto tree = grow_tree(d, all_rows(d.size()), cfg, rng);
      std::vector<std::vector<std::size_t>> members(tree.leaves.size());
      for (std::size_t r = 0; r < d.size(); ++r) {
        std::size_t i = 0;
        while (!tree.nodes[i].is_leaf())
          i = static_cast<std::size_t>(apply_test(tree.nodes[i].test, d.features.row(r)) ? tree.nodes[i].right
                                                                                         : tree.nodes[i].left);
        members[static_cast<std::size_t>(tree.nodes[i].leaf)].push_back(r);
      }
      for (const auto& node : tree.nodes) {
        CHECK(node.depth <= cfg.max_depth);
        if (!node.is_leaf()) continue;
        const auto& rows = members[static_cast<std::size_t>(node.leaf)];
        CHECK(tree.leaves[static_cast<std::size_t>(node.leaf)].count == rows.size());
        CHECK(rows.size() >= 1);
        if (rows.size() > cfg.min_samples && node.depth < cfg.max_depth) {
          // only a node no test could separate may stop early
          for (std::size_t r : rows) CHECK(std::equal(d.features.row(r).begin(), d.features.row(r).end(),
                                                      d.features.row(rows[0]).begin()));
        }
      }
    }
  }
}

TEST_CASE("train_forest") {
  Rng rng = make_stream(6, 0);
  std::vector<LabeledEvent> events;
  for (int i = 0; i < 6; ++i) events.push_back(make_event(rng, 8 + uniform_index(rng, 10), 5));
  RegressionForestConfig cfg;
  cfg.tests_per_node = 300;
  cfg.seed = 99;
  SUBCASE("one tree") {
    cfg.n_trees = 1;
    const auto f = train_forest(events, 0, cfg);
    CHECK(f.trees.size() == 1);
    CHECK(f.feature_dim == 5);
  }
  SUBCASE("deterministic") { CHECK(train_forest(events, 0, cfg) == train_forest(events, 0, cfg)); }
  SUBCASE("subsamples are half the data, without replacement, and differ per tree") {
    const std::size_t n = build_regression_training_set(events, 0).size();
    const auto a = tree_subsample(n, cfg, 0), b = tree_subsample(n, cfg, 1);
    CHECK(a.size() == static_cast<std::size_t>(std::llround(0.5 * static_cast<double>(n))));
    CHECK(std::set<std::size_t>(a.begin(), a.end()).size() == a.size());
    CHECK(a != b);
  }
  SUBCASE("leaf variances respect the floor") {
    for (const auto& tree : train_forest(events, 0, cfg).trees)
      for (const auto& leaf : tree.leaves) {
        CHECK(leaf.var_onset >= cfg.min_variance);
        CHECK(leaf.var_offset >= cfg.min_variance);
        CHECK(leaf.count >= 1);
      }
  }
  SUBCASE("no events") {
    try {
      train_forest(std::vector<LabeledEvent>{}, 0, cfg);
      FAIL("expected EmptyClass");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::EmptyClass);
    }
  }
}

TEST_CASE("route") {
  RegressionTree single;
  single.nodes.push_back({{}, -1, -1, 0, 0});
  single.leaves.push_back({3, 1, 2, 1, 4});
  CHECK(route(single, std::vector<double>{1, 2, 3}).mean_onset == 3.0);

  Rng rng = make_stream(7, 0);
  const RegressionSet s = random_set(rng, 80, 4);
  RegressionForestConfig cfg;
  cfg.tests_per_node = 100;
  cfg.min_samples = 5;
  const auto tree = grow_tree(s, all_rows(80), cfg, rng);
  std::set<int> used;
  for (const auto& n : tree.nodes)
    if (!n.is_leaf()) used.insert(n.test.channel);
  for (std::size_t r = 0; r < 80; ++r) {
    std::size_t i = 0;
    while (!tree.nodes[i].is_leaf())
      i = static_cast<std::size_t>(apply_test(tree.nodes[i].test, s.features.row(r)) ? tree.nodes[i].right
                                                                                     : tree.nodes[i].left);
    const LeafModel& expected = tree.leaves[static_cast<std::size_t>(tree.nodes[i].leaf)];
    CHECK(&route(tree, s.features.row(r)) == &expected);
    std::vector<double> x(s.features.row(r).begin(), s.features.row(r).end());
    for (int c = 0; c < 4; ++c)
      if (!used.count(c)) x[static_cast<std::size_t>(c)] = 1e6;
    CHECK(&route(tree, x) == &expected);
  }
}

TEST_CASE("forest_estimate") {
  RegressorForest f;
  f.feature_dim = 1;
  RegressionTree t;
  t.nodes.push_back({{}, -1, -1, 0, 0});
  t.leaves.push_back({3.0, 1.0, 2.0, 4.0, 1});
  f.trees.push_back(t);
  const std::vector<double> x{0.0};

  const auto one = forest_estimate(f, x, 10.0, 20);
  CHECK(one.onset[7] == doctest::Approx(0.3989422804014327).epsilon(1e-12));
  CHECK(one.offset[12] == doctest::Approx(1.0 / std::sqrt(2 * std::numbers::pi * 4.0)).epsilon(1e-12));
  for (int k = 1; k < 7; ++k) CHECK(one.onset[7 - k] == doctest::Approx(one.onset[7 + k]).epsilon(1e-15));

  // second tree whose density at 7 is 0.2
  RegressionTree t2 = t;
  const double var = 1.0 / (2 * std::numbers::pi * 0.2 * 0.2);
  t2.leaves[0] = {3.0, var, 2.0, 1.0, 1};
  f.trees.push_back(t2);
  const auto two = forest_estimate(f, x, 10.0, 20);
  CHECK(two.onset[7] == doctest::Approx((0.3989422804014327 + 0.2) / 2).epsilon(1e-12));

  for (std::size_t n = 0; n < 20; ++n) {
    const double p1 = oracle::normal_pdf(n, 7.0, 1.0), p2 = oracle::normal_pdf(n, 7.0, var);
    CHECK(std::abs(two.onset[n] - (p1 + p2) / 2) <= 1e-12);
    CHECK(two.onset[n] >= 0.0);
  }
}

TEST_CASE("blocked vote accumulation matches direct evaluation") {
  Rng rng = make_stream(8, 0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<BoundaryVote> votes(1 + uniform_index(rng, 60));
    for (auto& v : votes)
      v = {uniform01(rng), uniform_real(rng, -50, 300), uniform_real(rng, 1, 200), uniform_real(rng, -50, 300),
           uniform_real(rng, 1, 200)};
    const std::size_t grid = 1 + uniform_index(rng, 300);
    std::vector<double> on, off;
    kernels::accumulate_votes(votes, grid, on, off);
    for (std::size_t n = 0; n < grid; ++n) {
      double eon = 0.0, eoff = 0.0;
      for (const auto& v : votes) {
        eon += v.weight * oracle::normal_pdf(n, v.onset_center, v.onset_variance);
        eoff += v.weight * oracle::normal_pdf(n, v.offset_center, v.offset_variance);
      }
      CHECK(std::abs(on[n] - eon) <= 1e-12 * std::max(1.0, eon));
      CHECK(std::abs(off[n] - eoff) <= 1e-12 * std::max(1.0, eoff));
    }
  }
}
