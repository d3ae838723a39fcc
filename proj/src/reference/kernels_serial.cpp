// Serial reference versions of the parallel kernels. Written for clarity:
// they partition explicitly and reuse the scalar building blocks.

#include <cmath>
#include <limits>

#include "regbank/kernels.hpp"

namespace regbank::reference {

std::vector<double> split_costs(std::span<const SplitTest> pool, const RegressionSet& data,
                                std::span<const std::size_t> node) {
  std::vector<double> costs;
  costs.reserve(pool.size());
  for (const SplitTest& test : pool) {
    std::vector<BoundaryDistance> left, right;
    for (std::size_t row : node) {
      if (apply_test(test, data.features.row(row)))
        right.push_back(data.distances[row]);
      else
        left.push_back(data.distances[row]);
    }
    costs.push_back(left.empty() || right.empty() ? std::numeric_limits<double>::infinity()
                                                  : split_cost(left, right));
  }
  return costs;
}

void accumulate_votes(std::span<const BoundaryVote> votes, std::size_t grid,
                      std::vector<double>& onset, std::vector<double>& offset) {
  onset.assign(grid, 0.0);
  offset.assign(grid, 0.0);
  for (const BoundaryVote& v : votes) {
    for (std::size_t n = 0; n < grid; ++n) {
      onset[n] += v.weight * gaussian_pdf(static_cast<double>(n), v.onset_center, v.onset_variance);
      offset[n] += v.weight * gaussian_pdf(static_cast<double>(n), v.offset_center, v.offset_variance);
    }
  }
}

Matrix gram_matrix(std::span<const EventChannels> a, std::span<const EventChannels> b, const KernelSpec& spec) {
  Matrix k(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) k(i, j) = kernel_eval(spec, a[i], b[j]);
  return k;
}

Matrix gram_matrix(std::span<const EventChannels> samples, const KernelSpec& spec) {
  return gram_matrix(samples, samples, spec);
}

std::vector<std::size_t> nearest_centroids(const Matrix& points, const Matrix& centroids) {
  std::vector<std::size_t> out;
  out.reserve(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < centroids.rows(); ++k) {
      double d = 0.0;
      for (std::size_t j = 0; j < points.cols(); ++j) d += std::pow(points(i, j) - centroids(k, j), 2);
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    out.push_back(best);
  }
  return out;
}

}  // namespace regbank::reference
