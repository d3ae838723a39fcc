#include "regbank/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "regbank/kernels.hpp"
#include "regbank/random.hpp"

namespace regbank {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return d;
}

std::size_t distinct_rows(const Matrix& points) {
  std::vector<std::size_t> order(points.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto less = [&](std::size_t a, std::size_t b) {
    const auto ra = points.row(a), rb = points.row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  };
  std::sort(order.begin(), order.end(), less);
  std::size_t distinct = order.empty() ? 0 : 1;
  for (std::size_t i = 1; i < order.size(); ++i)
    if (less(order[i - 1], order[i])) ++distinct;
  return distinct;
}

}  // namespace

KMeansResult kmeans_fit(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t max_iters) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be positive");
  if (distinct_rows(points) < k)
    throw Error(ErrorCode::TooFewPoints, "fewer than " + std::to_string(k) + " distinct points");
  const std::size_t n = points.rows();
  Rng rng = make_stream(seed, 0x6b6d);

  // k-means++ seeding
  Matrix centroids;
  centroids.append_row(points.row(uniform_index(rng, n)));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points.row(i), centroids.row(0));
  while (centroids.rows() < k) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    double target = uniform01(rng) * total;
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      pick = i;
      if (target < d2[i]) break;
      target -= d2[i];
    }
    centroids.append_row(points.row(pick));
    const auto c = centroids.row(centroids.rows() - 1);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(points.row(i), c));
  }

  KMeansResult result;
  std::vector<std::size_t> assignment = kernels::nearest_centroids(points, centroids);
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) inertia += squared_distance(points.row(i), centroids.row(assignment[i]));
    result.inertia.push_back(inertia);

    // Re-seed empty clusters from the point farthest from its centroid.
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t a : assignment) ++counts[a];
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[assignment[i]] <= 1) continue;
        const double d = squared_distance(points.row(i), centroids.row(assignment[i]));
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      --counts[assignment[far]];
      assignment[far] = c;
      counts[c] = 1;
    }

    Matrix updated(k, points.cols(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      auto dst = updated.row(assignment[i]);
      const auto src = points.row(i);
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
    }
    for (std::size_t c = 0; c < k; ++c)
      for (double& v : updated.row(c)) v /= static_cast<double>(counts[c]);
    centroids = std::move(updated);
    ++result.iterations;

    auto next = kernels::nearest_centroids(points, centroids);
    if (next == assignment) break;
    assignment = std::move(next);
  }
  result.codebook.centroids = std::move(centroids);
  return result;
}

Codebook kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t max_iters) {
  return kmeans_fit(points, k, seed, max_iters).codebook;
}

std::vector<double> bow_encode(const Matrix& segments, const Codebook& codebook) {
  if (segments.empty()) throw Error(ErrorCode::EmptyEvent, "bag of words over an empty event");
  std::vector<double> hist(codebook.size(), 0.0);
  for (std::size_t a : kernels::nearest_centroids(segments, codebook.centroids)) hist[a] += 1.0;
  for (double& h : hist) h /= static_cast<double>(segments.rows());
  return hist;
}

std::vector<double> pbow_encode(const Matrix& segments, const Codebook& codebook, int levels,
                                std::span<const double> level_weights) {
  if (levels < 1) throw Error(ErrorCode::InvalidArgument, "pyramid needs at least one level");
  if (segments.empty()) throw Error(ErrorCode::EmptyEvent, "pyramid over an empty event");
  const std::size_t v = codebook.size();
  const auto words = kernels::nearest_centroids(segments, codebook.centroids);
  const std::size_t n = words.size();
  std::vector<double> out;
  out.reserve(v * ((std::size_t{1} << levels) - 1));
  // Each non-empty cell histogram sums to its weight, so the global l1 norm
  // is the sum of those weights.
  double mass = 0.0;
  for (int level = 0; level < levels; ++level) {
    const std::size_t cells = std::size_t{1} << level;
    const double weight = level_weights.empty() ? 1.0 : level_weights[static_cast<std::size_t>(level)];
    std::size_t start = 0;
    for (std::size_t cell = 0; cell < cells; ++cell) {
      const std::size_t len = n / cells + (cell < n % cells ? 1 : 0);
      std::vector<double> hist(v, 0.0);
      for (std::size_t i = start; i < start + len; ++i) hist[words[i]] += 1.0;
      if (len > 0) {
        for (double& h : hist) h = h / static_cast<double>(len) * weight;
        mass += weight;
      }
      out.insert(out.end(), hist.begin(), hist.end());
      start += len;
    }
  }
  if (mass > 0.0)
    for (double& x : out) x /= mass;
  return out;
}

ClassId max_vote(std::span<const double> raw_phi) {
  if (raw_phi.empty()) throw Error(ErrorCode::InvalidArgument, "max vote over an empty descriptor");
  return static_cast<ClassId>(std::max_element(raw_phi.begin(), raw_phi.end()) - raw_phi.begin());
}

Standardizer fit_standardizer(const Matrix& x) {
  Standardizer s;
  s.mean.assign(x.cols(), 0.0);
  s.scale.assign(x.cols(), 1.0);
  if (x.empty()) return s;
  const double n = static_cast<double>(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t c = 0; c < x.cols(); ++c) s.mean[c] += x(i, c);
  for (double& m : s.mean) m /= n;
  std::vector<double> var(x.cols(), 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t c = 0; c < x.cols(); ++c) var[c] += (x(i, c) - s.mean[c]) * (x(i, c) - s.mean[c]);
  for (std::size_t c = 0; c < x.cols(); ++c) {
    const double sd = std::sqrt(var[c] / n);
    s.scale[c] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

Matrix Standardizer::apply(const Matrix& x) const {
  Matrix out = x;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t c = 0; c < out.cols(); ++c) out(i, c) = (out(i, c) - mean[c]) / scale[c];
  return out;
}

}  // namespace regbank
