#include "regbank/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "regbank/parallel.hpp"

namespace regbank::kernels {

namespace {

struct SideSums {
  double n = 0, on = 0, on2 = 0, off = 0, off2 = 0;

  void add(const BoundaryDistance& d) {
    n += 1;
    on += d.onset;
    on2 += d.onset * d.onset;
    off += d.offset;
    off2 += d.offset * d.offset;
  }
  double scatter() const {
    double s = (on2 - on * on / n) + (off2 - off * off / n);
    return s > 0.0 ? s : 0.0;
  }
};

}  // namespace

void add_gaussian_block(double weight, double mean, double variance, std::size_t lo, std::size_t hi,
                        std::vector<double>& out) {
  if (lo >= hi) return;
  // Exact density at the block point nearest the mean, then the ratio
  // recurrence g(n+1) = g(n) * exp(-k (2(n - mean) + 1)) outward; densities
  // only shrink away from the mean, so a zero ends the walk.
  const double k = 1.0 / (2.0 * variance);
  const double scale = weight / std::sqrt(2.0 * std::numbers::pi * variance);
  const double q = std::exp(-2.0 * k);
  const auto peak = static_cast<std::size_t>(
      std::clamp(std::llround(mean), static_cast<long long>(lo), static_cast<long long>(hi - 1)));
  const double d0 = static_cast<double>(peak) - mean;
  const double g0 = scale * std::exp(-k * d0 * d0);
  if (g0 == 0.0) return;
  out[peak] += g0;
  double g = g0, r = std::exp(-k * (2.0 * d0 + 1.0));
  for (std::size_t n = peak + 1; n < hi; ++n) {
    g *= r;
    if (g == 0.0) break;
    out[n] += g;
    r *= q;
  }
  g = g0;
  r = std::exp(k * (2.0 * d0 - 1.0));
  for (std::size_t n = peak; n-- > lo;) {
    g *= r;
    if (g == 0.0) break;
    out[n] += g;
    r *= q;
  }
}

std::vector<double> split_costs(std::span<const SplitTest> pool, const RegressionSet& data,
                                std::span<const std::size_t> node) {
  // Tests sharing a channel share one sorted copy of the node's values;
  // each test is then a binary search into prefix sums of the distances.
  std::vector<std::vector<std::size_t>> by_channel(data.features.cols());
  for (std::size_t t = 0; t < pool.size(); ++t) by_channel[static_cast<std::size_t>(pool[t].channel)].push_back(t);

  std::vector<double> costs(pool.size(), std::numeric_limits<double>::infinity());
  parallel_for(by_channel.size(), [&](std::size_t channel) {
    const auto& tests = by_channel[channel];
    if (tests.empty()) return;
    std::vector<std::pair<double, std::size_t>> order;
    order.reserve(node.size());
    for (std::size_t row : node) order.emplace_back(data.features(row, channel), row);
    std::sort(order.begin(), order.end());
    std::vector<double> values(order.size());
    std::vector<SideSums> prefix(order.size() + 1);
    for (std::size_t i = 0; i < order.size(); ++i) {
      values[i] = order[i].first;
      prefix[i + 1] = prefix[i];
      prefix[i + 1].add(data.distances[order[i].second]);
    }
    const SideSums& total = prefix.back();
    for (std::size_t t : tests) {
      const auto k = static_cast<std::size_t>(
          std::upper_bound(values.begin(), values.end(), pool[t].threshold) - values.begin());
      if (k == 0 || k == values.size()) continue;
      const SideSums& left = prefix[k];
      SideSums right;
      right.n = total.n - left.n;
      right.on = total.on - left.on;
      right.on2 = total.on2 - left.on2;
      right.off = total.off - left.off;
      right.off2 = total.off2 - left.off2;
      costs[t] = left.scatter() + right.scatter();
    }
  });
  return costs;
}

void accumulate_votes(std::span<const BoundaryVote> votes, std::size_t grid,
                      std::vector<double>& onset, std::vector<double>& offset) {
  onset.assign(grid, 0.0);
  offset.assign(grid, 0.0);
  // Fixed-size grid blocks, so the summation order per point (votes in
  // order) never depends on the thread count.
  const std::size_t n_blocks = (grid + kVoteBlock - 1) / kVoteBlock;
  parallel_for(n_blocks, [&](std::size_t b) {
    const std::size_t lo = b * kVoteBlock, hi = std::min(grid, lo + kVoteBlock);
    for (const BoundaryVote& v : votes) {
      if (v.weight == 0.0) continue;
      add_gaussian_block(v.weight, v.onset_center, v.onset_variance, lo, hi, onset);
      add_gaussian_block(v.weight, v.offset_center, v.offset_variance, lo, hi, offset);
    }
  });
}

Matrix gram_matrix(std::span<const EventChannels> a, std::span<const EventChannels> b, const KernelSpec& spec) {
  Matrix k(a.size(), b.size());
  parallel_for(a.size(), [&](std::size_t i) {
    for (std::size_t j = 0; j < b.size(); ++j) k(i, j) = kernel_eval(spec, a[i], b[j]);
  });
  return k;
}

Matrix gram_matrix(std::span<const EventChannels> samples, const KernelSpec& spec) {
  const std::size_t n = samples.size();
  Matrix k(n, n);
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = i; j < n; ++j) k(i, j) = kernel_eval(spec, samples[i], samples[j]);
  });
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) k(i, j) = k(j, i);
  return k;
}

std::vector<std::size_t> nearest_centroids(const Matrix& points, const Matrix& centroids) {
  std::vector<std::size_t> assignment(points.rows());
  const auto n = static_cast<std::ptrdiff_t>(points.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
    const auto p = points.row(static_cast<std::size_t>(ii));
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_k = 0;
    for (std::size_t k = 0; k < centroids.rows(); ++k) {
      const auto c = centroids.row(k);
      double d = 0.0;
      for (std::size_t j = 0; j < p.size(); ++j) {
        const double diff = p[j] - c[j];
        d += diff * diff;
      }
      if (d < best) {
        best = d;
        best_k = k;
      }
    }
    assignment[static_cast<std::size_t>(ii)] = best_k;
  }
  return assignment;
}

}  // namespace regbank::kernels
