#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "regbank/descriptor.hpp"

using namespace regbank;

namespace {

RegressorForest leaf_forest(std::vector<LeafModel> leaves_per_tree, ClassId c = 0) {
  RegressorForest f;
  f.class_id = c;
  f.feature_dim = 1;
  for (const auto& leaf : leaves_per_tree) {
    RegressionTree t;
    t.nodes.push_back({{}, -1, -1, 0, 0});
    t.leaves.push_back(leaf);
    f.trees.push_back(t);
  }
  return f;
}

double oracle_phi(const RegressorForest& forest, const Matrix& padded, const std::vector<double>& weights) {
  const std::size_t grid = padded.rows();
  std::vector<double> fp(grid, 0.0), fm(grid, 0.0);
  const double trees = static_cast<double>(forest.trees.size());
  for (std::size_t i = 0; i < grid; ++i)
    for (std::size_t n = 0; n < grid; ++n)
      for (const auto& tree : forest.trees) {
        const LeafModel& leaf = route(tree, padded.row(i));
        fp[n] += weights[i] * oracle::normal_pdf(n, i - leaf.mean_onset, leaf.var_onset) / trees;
        fm[n] += weights[i] * oracle::normal_pdf(n, i + leaf.mean_offset, leaf.var_offset) / trees;
      }
  return 0.5 * (*std::max_element(fp.begin(), fp.end()) + *std::max_element(fm.begin(), fm.end()));
}

}  // namespace

TEST_CASE("padding") {
  Rng rng = make_stream(21, 0);
  const Matrix seq = oracle::random_matrix(rng, 4, 3);
  const Matrix padded = pad_sequence(seq, 5);
  REQUIRE(padded.rows() == 20);
  CHECK(pad_offset(4, 5) == 8);
  for (std::size_t r = 0; r < 20; ++r)
    for (std::size_t c = 0; c < 3; ++c) CHECK(padded(r, c) == (r >= 8 && r < 12 ? seq(r - 8, c) : 0.0));
  CHECK(pad_sequence(seq, 1) == seq);
  CHECK_THROWS_AS(pad_sequence(seq, 4), Error);
}

TEST_CASE("score curves") {
  const RegressorForest f = leaf_forest({{3.0, 1.0, 2.0, 1.0, 1}});
  Matrix padded(20, 1);
  std::vector<double> w(20, 0.0);
  w[10] = 1.0;
  const ScoreCurves s = score_curves(f, padded, w);
  CHECK(s.onset[7] == doctest::Approx(0.3989422804014327).epsilon(1e-12));
  CHECK(s.offset[12] == doctest::Approx(0.3989422804014327).epsilon(1e-12));
  CHECK(s.onset[7] == s.offset[12]);

  std::fill(w.begin(), w.end(), 0.0);
  const ScoreCurves zero = score_curves(f, padded, w);
  CHECK(std::all_of(zero.onset.begin(), zero.onset.end(), [](double v) { return v == 0.0; }));
  CHECK(std::all_of(zero.offset.begin(), zero.offset.end(), [](double v) { return v == 0.0; }));
  CHECK(phi_entry(zero) == 0.0);
}

TEST_CASE("phi entry") {
  ScoreCurves s{{0.1, 0.4, 0.2}, {0.2, 0.05, 0.0}};
  CHECK(phi_entry(s) == doctest::Approx(0.3));
  ScoreCurves scaled = s;
  for (double& v : scaled.onset) v *= 2.5;
  for (double& v : scaled.offset) v *= 2.5;
  CHECK(phi_entry(scaled) == doctest::Approx(2.5 * phi_entry(s)));
}

TEST_CASE("score curves match the brute-force oracle") {
  Rng rng = make_stream(22, 0);
  for (int trial = 0; trial < 60; ++trial) {
    RegressionForestConfig cfg;
    cfg.n_trees = 1 + static_cast<int>(uniform_index(rng, 3));
    cfg.tests_per_node = 50;
    cfg.min_samples = 2;
    cfg.max_depth = 4;
    cfg.seed = static_cast<std::uint64_t>(trial);
    std::vector<LabeledEvent> train;
    for (int e = 0; e < 3; ++e) train.push_back({"", 0, oracle::random_matrix(rng, 3 + uniform_index(rng, 10), 3)});
    const RegressorForest f = train_forest(train, 0, cfg);
    const Matrix padded = pad_sequence(oracle::random_matrix(rng, 1 + uniform_index(rng, 20), 3), 5);
    std::vector<double> w(padded.rows());
    for (double& v : w) v = uniform01(rng);
    const double expected = oracle_phi(f, padded, w);
    CHECK(std::abs(phi_entry(score_curves(f, padded, w)) - expected) <= 1e-9 * std::max(1.0, expected));
  }
}

TEST_CASE("padded posteriors and the unstructured descriptor") {
  MatcherModel m;
  m.n_classes = 2;
  m.feature_dim = 1;
  // root splits at 0.5: left leaf (0.2, 0.8), right leaf (0.4, 0.6)
  ClassificationTree t;
  t.nodes = {{{0, 0.5}, 1, 2, -1}, {{}, -1, -1, 0}, {{}, -1, -1, 1}};
  t.leaf_counts = {1, 4, 2, 3};
  m.trees.push_back(t);
  Matrix event(2, 1);
  event(1, 0) = 1.0;
  const auto u = extract_unstructured(m, event);
  CHECK(u[0] == doctest::Approx(0.3));
  CHECK(u[1] == doctest::Approx(0.7));
  const Matrix single(1, 1, 1.0);
  CHECK(extract_unstructured(m, single)[0] == doctest::Approx(0.4));

  const Matrix p = padded_posteriors(m, event, 5);
  REQUIRE(p.rows() == 10);
  const Matrix direct = posteriors(m, pad_sequence(event, 5));
  CHECK(p == direct);
}

TEST_CASE("descriptor extraction") {
  Rng rng = make_stream(23, 0);
  std::vector<LabeledEvent> train;
  for (int c = 0; c < 3; ++c)
    for (int e = 0; e < 4; ++e) {
      Matrix seg = oracle::random_matrix(rng, 4 + uniform_index(rng, 6), 3);
      for (std::size_t r = 0; r < seg.rows(); ++r) seg(r, 0) += c;
      train.push_back({"", c, seg});
    }
  RegressionForestConfig fcfg;
  fcfg.n_trees = 2;
  fcfg.tests_per_node = 40;
  fcfg.min_samples = 3;
  std::vector<RegressorForest> bank;
  for (int c = 0; c < 3; ++c) bank.push_back(train_forest(train, c, fcfg));
  MatcherConfig mcfg;
  mcfg.n_trees = 5;
  const MatcherModel matcher = train_matcher(train, 3, mcfg);
  const Matrix& event = train[5].segments;

  const RawDescriptor d = extract_descriptor(bank, matcher, event);
  REQUIRE(d.phi.size() == 3);
  CHECK(extract_descriptor(bank, matcher, event) == d);
  const Matrix padded = pad_sequence(event, 5);
  const Matrix post = posteriors(matcher, padded);
  for (std::size_t c = 0; c < 3; ++c) {
    std::vector<double> w(padded.rows());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = post(i, c);
    CHECK(std::abs(d.phi[c] - oracle_phi(bank[c], padded, w)) <= 1e-9);
  }
  double sum = 0.0;
  for (double v : d.phi_hat) sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

  // a one-forest bank still reads class 0's posterior column
  const std::vector<RegressorForest> one{bank[0]};
  CHECK(extract_bor(one, matcher, event) == std::vector<double>{d.phi[0]});
}

TEST_CASE("normalization") {
  const std::vector<std::vector<double>> training{{1, 2}, {2, 4}};
  const NormalizationStats stats = fit_normalizer(training);
  CHECK(stats.max_phi == std::vector<double>{2, 4});
  CHECK(fit_normalizer(std::vector<std::vector<double>>{{3, 5}}).max_phi == std::vector<double>{3, 5});

  const auto a = normalize(std::vector<double>{1, 2}, stats);
  CHECK(a.phi == std::vector<double>{0.5, 0.5});
  CHECK(a.state == NormalizationState::L1);
  CHECK(normalize(std::vector<double>{2, 0}, stats).phi == std::vector<double>{1, 0});
  const auto big = normalize(std::vector<double>{8, 4}, stats);
  CHECK(big.phi[0] == doctest::Approx(0.8));
  const auto zero = normalize(std::vector<double>{0, 0}, stats);
  CHECK(zero.phi == std::vector<double>{0, 0});
  const NormalizationStats zero_max{{0, 4}};
  CHECK(normalize(std::vector<double>{3, 4}, zero_max).phi == std::vector<double>{0, 1});

  Rng rng = make_stream(24, 0);
  std::vector<std::vector<double>> rows(30, std::vector<double>(5));
  for (auto& r : rows)
    for (double& v : r) v = uniform01(rng);
  const auto s = fit_normalizer(rows);
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < 5; ++k) CHECK(s.max_phi[k] >= r[k]);
    const auto n = normalize(r, s);
    double sum = 0.0;
    for (double v : n.phi) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-9);
  }
}

TEST_CASE("training descriptors use the held-out matcher") {
  Rng rng = make_stream(25, 0);
  std::vector<LabeledEvent> train;
  for (int c = 0; c < 2; ++c)
    for (int e = 0; e < 3; ++e) train.push_back({"e" + std::to_string(c * 3 + e), c, oracle::random_matrix(rng, 5, 2)});
  RegressionForestConfig fcfg;
  fcfg.n_trees = 1;
  fcfg.tests_per_node = 20;
  std::vector<RegressorForest> bank{train_forest(train, 0, fcfg), train_forest(train, 1, fcfg)};
  MatcherConfig mcfg;
  mcfg.n_trees = 3;
  const FoldedMatchers folded = train_folded_matchers(train, 2, 3, mcfg);
  NormalizationStats stats;
  const DescriptorTable table = extract_training_descriptors(train, bank, folded, stats);
  REQUIRE(table.raw.size() == train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    CHECK(table.ids[i] == train[i].id);
    CHECK(table.raw[i] == extract_descriptor(bank, folded.for_event(i), train[i].segments));
    double sum = 0.0;
    for (double v : table.normalized[i]) {
      CHECK(v >= 0.0);
      sum += v;
    }
    if (sum > 0.0) CHECK(std::abs(sum - 1.0) <= 1e-9);
  }
  std::vector<std::vector<double>> raws;
  for (const auto& r : table.raw) raws.push_back(r.phi);
  CHECK(stats == fit_normalizer(raws));
}
