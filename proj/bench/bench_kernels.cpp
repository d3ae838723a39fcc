// Times each OpenMP kernel against its serial reference and reports the
// largest absolute difference between the two outputs.

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>

#include "regbank/kernels.hpp"
#include "regbank/random.hpp"

using namespace regbank;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count() / reps;
}

double max_diff(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::isinf(a[i]) && std::isinf(b[i])) continue;
    d = std::max(d, std::abs(a[i] - b[i]));
  }
  return d;
}

void report(const char* name, double serial, double parallel, double diff) {
  std::printf("%-18s serial %9.2f ms   parallel %9.2f ms   speedup %5.2fx   max|diff| %.3g\n", name, serial,
              parallel, serial / parallel, diff);
}

}  // namespace

int main() {
  std::printf("threads: %d\n", omp_get_max_threads());
  Rng rng = make_stream(7, 0);

  {
    RegressionSet data;
    data.features = Matrix(4000, 56);
    for (std::size_t i = 0; i < data.features.rows(); ++i) {
      for (double& v : data.features.row(i)) v = standard_normal(rng);
      data.distances.push_back({uniform_real(rng, 0, 40), uniform_real(rng, 0, 40)});
    }
    std::vector<std::size_t> node(data.size());
    std::iota(node.begin(), node.end(), std::size_t{0});
    const auto pool = sample_test_pool(rng, data.features, node, 2000);
    std::vector<double> a, b;
    const double s = time_ms([&] { a = reference::split_costs(pool, data, node); }, 3);
    const double p = time_ms([&] { b = kernels::split_costs(pool, data, node); }, 3);
    report("split_costs", s, p, max_diff(a, b));
  }
  {
    std::vector<BoundaryVote> votes(20000);
    for (auto& v : votes)
      v = {uniform01(rng), uniform_real(rng, 0, 500), uniform_real(rng, 1, 30), uniform_real(rng, 0, 500),
           uniform_real(rng, 1, 30)};
    std::vector<double> on1, off1, on2, off2;
    const double s = time_ms([&] { reference::accumulate_votes(votes, 500, on1, off1); }, 3);
    const double p = time_ms([&] { kernels::accumulate_votes(votes, 500, on2, off2); }, 3);
    report("accumulate_votes", s, p, std::max(max_diff(on1, on2), max_diff(off1, off2)));
  }
  {
    std::vector<EventChannels> samples(600);
    for (auto& e : samples) {
      std::vector<double> h(250);
      for (double& v : h) v = uniform01(rng);
      e.channels = {h};
    }
    const KernelSpec spec = KernelSpec::chi2(0.5);
    Matrix a, b;
    const double s = time_ms([&] { a = reference::gram_matrix(samples, spec); }, 2);
    const double p = time_ms([&] { b = kernels::gram_matrix(samples, spec); }, 2);
    report("gram_matrix", s, p, max_diff(a.data(), b.data()));
  }
  {
    Matrix points(20000, 56), centroids(250, 56);
    for (std::size_t i = 0; i < points.rows(); ++i)
      for (double& v : points.row(i)) v = standard_normal(rng);
    for (std::size_t i = 0; i < centroids.rows(); ++i)
      for (double& v : centroids.row(i)) v = standard_normal(rng);
    std::vector<std::size_t> a, b;
    const double s = time_ms([&] { a = reference::nearest_centroids(points, centroids); }, 2);
    const double p = time_ms([&] { b = kernels::nearest_centroids(points, centroids); }, 2);
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < a.size(); ++i) mismatches += a[i] != b[i];
    report("nearest_centroids", s, p, static_cast<double>(mismatches));
  }
  return 0;
}
