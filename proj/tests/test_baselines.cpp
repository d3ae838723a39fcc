#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "regbank/baselines.hpp"
#include "regbank/kernels.hpp"

using namespace regbank;

namespace {

Matrix column(std::vector<double> v) {
  Matrix m;
  for (double x : v) m.append_row(std::vector<double>{x});
  return m;
}

}  // namespace

TEST_CASE("k-means on a 1-D toy set") {
  const auto cb = kmeans(column({0, 1, 10, 11}), 2, 1);
  std::vector<double> c{cb.centroids(0, 0), cb.centroids(1, 0)};
  std::sort(c.begin(), c.end());
  CHECK(c[0] == doctest::Approx(0.5));
  CHECK(c[1] == doctest::Approx(10.5));
}

TEST_CASE("k-means with k = n") {
  const Matrix pts = column({3, -1, 7, 2.5});
  const auto cb = kmeans(pts, 4, 2);
  std::vector<double> c, p{3, -1, 7, 2.5};
  for (std::size_t i = 0; i < 4; ++i) c.push_back(cb.centroids(i, 0));
  std::sort(c.begin(), c.end());
  std::sort(p.begin(), p.end());
  CHECK(c == p);
}

TEST_CASE("k-means inertia is non-increasing") {
  Rng rng = make_stream(41, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix pts = oracle::random_matrix(rng, 50 + uniform_index(rng, 200), 3);
    const auto r = kmeans_fit(pts, 2 + uniform_index(rng, 10), static_cast<std::uint64_t>(trial), 50);
    for (std::size_t i = 1; i < r.inertia.size(); ++i) CHECK(r.inertia[i] <= r.inertia[i - 1] + 1e-9);
    CHECK(kmeans_fit(pts, 5, 7).codebook == kmeans_fit(pts, 5, 7).codebook);
  }
}

TEST_CASE("k-means errors") {
  try {
    kmeans(column({1, 2}), 3, 0);
    FAIL("expected TooFewPoints");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooFewPoints);
  }
}

TEST_CASE("bag of words") {
  Codebook cb{column({0, 10})};
  CHECK(bow_encode(column({0.1, -0.2, 9}), cb) == std::vector<double>{2.0 / 3.0, 1.0 / 3.0});
  CHECK(bow_encode(column({1, 2, 3}), cb) == std::vector<double>{1, 0});
  Rng rng = make_stream(42, 0);
  Codebook big{oracle::random_matrix(rng, 17, 4)};
  for (int trial = 0; trial < 30; ++trial) {
    const auto h = bow_encode(oracle::random_matrix(rng, 1 + uniform_index(rng, 40), 4), big);
    double s = 0.0;
    for (double v : h) s += v;
    CHECK(std::abs(s - 1.0) <= 1e-9);
  }
}

TEST_CASE("pyramid bag of words") {
  Rng rng = make_stream(43, 0);
  Codebook cb{oracle::random_matrix(rng, 50, 3)};
  const Matrix seg = oracle::random_matrix(rng, 13, 3);
  CHECK(pbow_encode(seg, cb, 1) == bow_encode(seg, cb));
  CHECK(pbow_encode(seg, cb, 2).size() == 150);
  CHECK(pbow_encode(seg, cb, 3).size() == 350);

  // a one-segment event leaves the second level-1 cell empty
  Codebook two{column({0, 10})};
  const auto p = pbow_encode(column({10}), two, 2);
  REQUIRE(p.size() == 6);
  CHECK(p[4] == 0.0);
  CHECK(p[5] == 0.0);
  double s = 0.0;
  for (double v : p) s += v;
  CHECK(s == doctest::Approx(1.0));
}

TEST_CASE("max vote") {
  CHECK(max_vote(std::vector<double>{0.1, 0.9, 0.3}) == 1);
  CHECK(max_vote(std::vector<double>{0.5, 0.5, 0.5}) == 0);
  Rng rng = make_stream(44, 0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(6);
    for (double& x : v) x = uniform01(rng);
    std::vector<double> scaled = v;
    for (double& x : scaled) x *= 3.7;
    CHECK(max_vote(v) == max_vote(scaled));
  }
}

TEST_CASE("standardizer") {
  Rng rng = make_stream(45, 0);
  Matrix x = oracle::random_matrix(rng, 100, 3, 5, 9);
  for (std::size_t r = 0; r < x.rows(); ++r) x(r, 2) = 4.0;  // constant channel
  const auto s = fit_standardizer(x);
  const Matrix z = s.apply(x);
  for (std::size_t c = 0; c < 2; ++c) {
    double mean = 0.0, sq = 0.0;
    for (std::size_t r = 0; r < z.rows(); ++r) mean += z(r, c);
    mean /= z.rows();
    for (std::size_t r = 0; r < z.rows(); ++r) sq += (z(r, c) - mean) * (z(r, c) - mean);
    CHECK(std::abs(mean) <= 1e-12);
    CHECK(sq / z.rows() == doctest::Approx(1.0));
  }
  for (std::size_t r = 0; r < z.rows(); ++r) CHECK(std::isfinite(z(r, 2)));
}

TEST_CASE("parallel nearest centroids match the reference") {
  Rng rng = make_stream(46, 0);
  const Matrix pts = oracle::random_matrix(rng, 500, 7);
  const Matrix cents = oracle::random_matrix(rng, 33, 7);
  CHECK(kernels::nearest_centroids(pts, cents) == reference::nearest_centroids(pts, cents));
  // ties go to the lowest index
  const Matrix dup = column({1, 1});
  CHECK(kernels::nearest_centroids(column({1}), dup)[0] == 0);
}

TEST_CASE("parallel split costs match the reference") {
  Rng rng = make_stream(47, 0);
  for (int trial = 0; trial < 20; ++trial) {
    RegressionSet s;
    s.features = oracle::random_matrix(rng, 80, 5);
    for (std::size_t i = 0; i < 80; ++i) s.distances.push_back({uniform_real(rng, 0, 40), uniform_real(rng, 0, 40)});
    std::vector<std::size_t> node;
    for (std::size_t i = 0; i < 80; ++i)
      if (uniform01(rng) < 0.6) node.push_back(i);
    const auto pool = sample_test_pool(rng, s.features, node, 300);
    const auto a = kernels::split_costs(pool, s, node), b = reference::split_costs(pool, s, node);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (std::isinf(b[i])) CHECK(std::isinf(a[i]));
      else CHECK(std::abs(a[i] - b[i]) <= 1e-9 * std::max(1.0, b[i]));
    }
  }
}
