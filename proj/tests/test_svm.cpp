#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "regbank/kernels.hpp"
#include "regbank/svm.hpp"

using namespace regbank;

namespace {

EventChannels one(std::vector<double> v) { return {{std::move(v)}}; }

Matrix linear_gram(const std::vector<std::vector<double>>& x) {
  Matrix k(x.size(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j)
      for (std::size_t d = 0; d < x[i].size(); ++d) k(i, j) += x[i][d] * x[j][d];
  return k;
}

std::vector<double> random_histogram(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  double s = 0.0;
  for (double& x : v) s += (x = uniform01(rng));
  for (double& x : v) x /= s;
  return v;
}

}  // namespace

TEST_CASE("chi-square distance") {
  const std::vector<double> u{0.5, 0.5};
  CHECK(chi2_distance(u, u) == 0.0);
  CHECK(chi2_distance(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == doctest::Approx(2.0));
  CHECK(chi2_distance(u, std::vector<double>{0.25, 0.75}) == doctest::Approx(0.0625 / 0.75 + 0.0625 / 1.25));
  CHECK(chi2_distance(std::vector<double>{0, 1}, std::vector<double>{0, 1}) == 0.0);
  try {
    chi2_distance(std::vector<double>{1}, std::vector<double>{1, 2});
    FAIL("expected LengthMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LengthMismatch);
  }
  try {
    chi2_distance(std::vector<double>{-1, 2}, std::vector<double>{1, 2});
    FAIL("expected NegativeEntry");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NegativeEntry);
  }
}

TEST_CASE("extended Gaussian kernel") {
  Rng rng = make_stream(31, 0);
  const auto spec = KernelSpec::extended_gaussian({0.7, 1.3});
  for (int trial = 0; trial < 100; ++trial) {
    const EventChannels a{{random_histogram(rng, 5), random_histogram(rng, 5)}};
    const EventChannels b{{random_histogram(rng, 5), random_histogram(rng, 5)}};
    CHECK(std::abs(kernel_eval(spec, a, a) - 1.0) <= 1e-12);
    CHECK(std::abs(kernel_eval(spec, a, b) - kernel_eval(spec, b, a)) <= 1e-12);
    const double expected =
        std::exp(-(chi2_distance(a.channels[0], b.channels[0]) / 0.7 + chi2_distance(a.channels[1], b.channels[1]) / 1.3));
    CHECK(kernel_eval(spec, a, b) == doctest::Approx(expected).epsilon(1e-12));
  }
  const EventChannels x = one({1, 0}), y = one({0, 1});
  CHECK(kernel_eval(KernelSpec::extended_gaussian({2.0}), x, y) == doctest::Approx(std::exp(-1.0)));
  CHECK_THROWS_AS(kernel_eval(KernelSpec::extended_gaussian({1.0, 1.0}), x, y), Error);
}

TEST_CASE("other kernels") {
  const EventChannels a = one({0.2, 0.8}), b = one({0.6, 0.4});
  CHECK(kernel_eval(KernelSpec::linear(), a, b) == doctest::Approx(0.12 + 0.32));
  CHECK(kernel_eval(KernelSpec::rbf(2.0), a, b) == doctest::Approx(std::exp(-2.0 * (0.16 + 0.16))));
  CHECK(kernel_eval(KernelSpec::hist(), a, b) == doctest::Approx(0.2 + 0.4));
  CHECK(kernel_eval(KernelSpec::chi2(1.5), a, b) == doctest::Approx(std::exp(-1.5 * chi2_distance(a.channels[0], b.channels[0]))));
  for (auto kind : {KernelKind::Linear, KernelKind::Rbf, KernelKind::Chi2, KernelKind::Hist, KernelKind::ExtendedGaussian})
    CHECK(kernel_kind_from_string(to_string(kind)) == kind);
}

TEST_CASE("channel scales") {
  const std::vector<EventChannels> same{one({0.5, 0.5}), one({0.5, 0.5})};
  CHECK(channel_scales(same, 1)[0] == 1e-12);
  const std::vector<EventChannels> apart{one({1, 0}), one({0, 1})};
  CHECK(channel_scales(apart, 1)[0] == doctest::Approx(2.0));

  Rng rng = make_stream(32, 0);
  std::vector<EventChannels> s;
  for (int i = 0; i < 12; ++i) s.push_back({{random_histogram(rng, 4), random_histogram(rng, 3)}});
  const auto scales = channel_scales(s, 2);
  for (std::size_t k = 0; k < 2; ++k) {
    double total = 0.0;
    int pairs = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t j = i + 1; j < s.size(); ++j, ++pairs) total += chi2_distance(s[i].channels[k], s[j].channels[k]);
    CHECK(scales[k] == doctest::Approx(total / pairs).epsilon(1e-12));
  }
}

TEST_CASE("SMO two-point problem") {
  const Matrix k = linear_gram({{-1.0}, {1.0}});
  const std::vector<int> y{-1, 1};
  SmoConfig cfg;
  cfg.c_reg = 1e6;
  cfg.tol = 1e-9;
  const auto sol = smo_train_binary(k, y, cfg);
  CHECK(std::abs(sol.alpha[0] - 0.5) <= 1e-6);
  CHECK(std::abs(sol.alpha[1] - 0.5) <= 1e-6);
  CHECK(std::abs(sol.bias) <= 1e-6);
}

TEST_CASE("SMO satisfies KKT on separable sets") {
  Rng rng = make_stream(33, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 4 + uniform_index(rng, 40);
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (std::size_t i = 0; i < n; ++i) {
      const int label = i % 2 == 0 ? 1 : -1;
      x.push_back({label * (0.5 + uniform01(rng)), uniform_real(rng, -2, 2)});
      y.push_back(label);
    }
    const Matrix k = linear_gram(x);
    SmoConfig cfg;
    cfg.c_reg = 0.1 + 10.0 * uniform01(rng);
    const auto sol = smo_train_binary(k, y, cfg);
    double balance = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = sol.alpha[i];
      CHECK(a >= -1e-12);
      CHECK(a <= cfg.c_reg + 1e-12);
      balance += a * y[i];
      double f = sol.bias;
      for (std::size_t j = 0; j < n; ++j) f += sol.alpha[j] * y[j] * k(j, i);
      const double margin = y[i] * f;
      const double slack = 1e-3;
      if (a <= 1e-8) CHECK(margin >= 1.0 - slack);
      else if (a >= cfg.c_reg - 1e-8) CHECK(margin <= 1.0 + slack);
      else CHECK(std::abs(margin - 1.0) <= slack);
    }
    CHECK(std::abs(balance) <= 1e-9);
  }
}

TEST_CASE("XOR with an RBF kernel") {
  const std::vector<EventChannels> x{one({0, 0}), one({1, 1}), one({0, 1}), one({1, 0})};
  const std::vector<ClassId> y{0, 0, 1, 1};
  const auto spec = KernelSpec::rbf(1.0);
  const SvmModel m = ovo_train(x, y, spec, 100.0);
  REQUIRE(m.machines.size() == 1);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(ovo_predict(m, x[i]) == y[i]);
  // duplicated data keeps the sign pattern
  std::vector<EventChannels> xx = x;
  std::vector<ClassId> yy = y;
  xx.insert(xx.end(), x.begin(), x.end());
  yy.insert(yy.end(), y.begin(), y.end());
  const SvmModel m2 = ovo_train(xx, yy, spec, 100.0);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(ovo_predict(m2, x[i]) == y[i]);
}

TEST_CASE("one-vs-one") {
  std::vector<EventChannels> x;
  std::vector<ClassId> y;
  const double centers[3][2] = {{0, 0}, {10, 0}, {0, 10}};
  Rng rng = make_stream(34, 0);
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 8; ++i) {
      x.push_back(one({centers[c][0] + uniform_real(rng, -1, 1), centers[c][1] + uniform_real(rng, -1, 1)}));
      y.push_back(c);
    }
  const SvmModel m = ovo_train(x, y, KernelSpec::linear(), 10.0);
  CHECK(m.machines.size() == 3);
  CHECK(m.classes == std::vector<ClassId>{0, 1, 2});
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(ovo_predict(m, x[i]) == y[i]);
  CHECK(ovo_predict(m, one({-5, -5})) == 0);
  CHECK(ovo_predict(m, one({20, 0})) == 1);

  // the Gram-matrix overload trains the same model
  const Matrix gram = kernels::gram_matrix(x, KernelSpec::linear());
  std::vector<std::size_t> rows(x.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  CHECK(ovo_train(gram, rows, x, y, KernelSpec::linear(), 10.0) == m);

  // two classes: prediction is the sign of the single machine
  const std::vector<EventChannels> x2(x.begin(), x.begin() + 16);
  const std::vector<ClassId> y2(y.begin(), y.begin() + 16);
  const SvmModel b = ovo_train(x2, y2, KernelSpec::linear(), 10.0);
  REQUIRE(b.machines.size() == 1);
  for (int trial = 0; trial < 50; ++trial) {
    const EventChannels p = one({uniform_real(rng, -5, 15), uniform_real(rng, -5, 5)});
    const double f = decision_value(b.machines[0], b.kernel, p);
    if (f != 0.0) CHECK(ovo_predict(b, p) == (f > 0 ? b.machines[0].positive : b.machines[0].negative));
  }
}

TEST_CASE("tune") {
  std::vector<EventChannels> x;
  std::vector<ClassId> y;
  for (int i = 0; i < 12; ++i) {
    x.push_back(one({i < 6 ? -1.0 - 0.1 * i : 1.0 + 0.1 * i}));
    y.push_back(i < 6 ? 0 : 1);
  }
  const auto make = [](double) { return KernelSpec::linear(); };
  SUBCASE("single grid point") {
    const auto r = tune(x, y, make, {{7.0}, {1.0}}, 3, 1);
    CHECK(r.c_reg == 7.0);
    CHECK(r.param == 1.0);
  }
  SUBCASE("separable data reaches fold accuracy 1") {
    const auto r = tune(x, y, make, {{1e-4, 1.0, 100.0}, {1.0}}, 3, 1);
    CHECK(r.accuracy == 1.0);
    CHECK(r.c_reg == 1e-4);  // smallest C achieving the best accuracy
  }
  SUBCASE("leave-one-out runs n fits per grid point") {
    const auto r = tune(x, y, make, {{1.0, 10.0}, {1.0}}, 0, 1);
    CHECK(r.fits == 2 * x.size());
  }
  SUBCASE("stratified folds") {
    const auto f = stratified_folds(y, 3, 9);
    for (std::size_t k = 0; k < 3; ++k) {
      std::size_t n0 = 0, n1 = 0;
      for (std::size_t i = 0; i < f.size(); ++i)
        if (f[i] == k) (y[i] == 0 ? n0 : n1)++;
      CHECK(n0 == 2);
      CHECK(n1 == 2);
    }
  }
}

TEST_CASE("parallel Gram matrix matches the reference") {
  Rng rng = make_stream(35, 0);
  std::vector<EventChannels> a, b;
  for (int i = 0; i < 37; ++i) a.push_back({{random_histogram(rng, 6), random_histogram(rng, 6)}});
  for (int i = 0; i < 11; ++i) b.push_back({{random_histogram(rng, 6), random_histogram(rng, 6)}});
  for (const KernelSpec& spec : {KernelSpec::linear(), KernelSpec::rbf(0.7), KernelSpec::chi2(1.1), KernelSpec::hist(),
                                 KernelSpec::extended_gaussian({0.3, 0.4})}) {
    CHECK(kernels::gram_matrix(a, spec) == reference::gram_matrix(a, spec));
    CHECK(kernels::gram_matrix(a, b, spec) == reference::gram_matrix(a, b, spec));
    const Matrix g = kernels::gram_matrix(a, spec);
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < a.size(); ++j) CHECK(g(i, j) == doctest::Approx(kernel_eval(spec, a[i], a[j])));
  }
}
