#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "regbank/common.hpp"

namespace regbank {

/// An event as seen by the kernels: one or more descriptor channels. Single
/// channel kernels read channel 0; the extended Gaussian reads one channel
/// per configured scale.
struct EventChannels {
  std::vector<std::vector<double>> channels;

  bool operator==(const EventChannels&) const = default;
};

enum class KernelKind { Linear, Rbf, Chi2, Hist, ExtendedGaussian };

const char* to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& name);

struct KernelSpec {
  KernelKind kind = KernelKind::Linear;
  double gamma = 1.0;                  // rbf, chi2
  std::vector<double> channel_scales;  // extended Gaussian: A^k per channel

  static KernelSpec linear() { return {KernelKind::Linear, 1.0, {}}; }
  static KernelSpec rbf(double gamma) { return {KernelKind::Rbf, gamma, {}}; }
  static KernelSpec chi2(double gamma) { return {KernelKind::Chi2, gamma, {}}; }
  static KernelSpec hist() { return {KernelKind::Hist, 1.0, {}}; }
  static KernelSpec extended_gaussian(std::vector<double> scales) {
    return {KernelKind::ExtendedGaussian, 1.0, std::move(scales)};
  }

  bool operator==(const KernelSpec&) const = default;
};

/// sum_i (u_i - v_i)^2 / (u_i + v_i), skipping terms with u_i + v_i = 0.
double chi2_distance(std::span<const double> u, std::span<const double> v);

double kernel_eval(const KernelSpec& spec, const EventChannels& a, const EventChannels& b);

/// Mean pairwise chi-square distance per channel over all unordered training
/// pairs, floored at 1e-12.
std::vector<double> channel_scales(std::span<const EventChannels> training, std::size_t n_channels);

/// Mean pairwise squared Euclidean and chi-square distance on channel 0;
/// used to put gamma grids on a data-relative scale.
double mean_squared_distance(std::span<const EventChannels> samples);
double mean_chi2_distance(std::span<const EventChannels> samples);

struct SmoConfig {
  double c_reg = 1.0;
  double tol = 1e-3;
  std::int64_t max_iterations = 10'000'000;
};

struct BinarySolution {
  std::vector<double> alpha;
  double bias = 0.0;  // f(x) = sum_i alpha_i y_i K(x_i, x) + bias
  std::int64_t iterations = 0;
};

/// Dual SVM by sequential minimal optimization with second-order working
/// set selection. `kernel` is the n x n Gram matrix, labels are +1/-1.
BinarySolution smo_train_binary(const Matrix& kernel, std::span<const int> labels, const SmoConfig& cfg);

struct BinaryMachine {
  ClassId positive = 0;  // label +1
  ClassId negative = 0;  // label -1
  std::vector<EventChannels> support;
  std::vector<double> coef;  // alpha_i * y_i
  double bias = 0.0;

  bool operator==(const BinaryMachine&) const = default;
};

double decision_value(const BinaryMachine& m, const KernelSpec& spec, const EventChannels& x);

struct SvmModel {
  KernelSpec kernel;
  double c_reg = 1.0;
  std::vector<ClassId> classes;  // sorted
  std::vector<BinaryMachine> machines;

  bool operator==(const SvmModel&) const = default;
};

SvmModel ovo_train(std::span<const EventChannels> samples, std::span<const ClassId> labels,
                   const KernelSpec& spec, double c_reg);

/// Same as ovo_train, reusing a precomputed Gram matrix over `rows` of
/// `samples`.
SvmModel ovo_train(const Matrix& gram, std::span<const std::size_t> rows,
                   std::span<const EventChannels> samples, std::span<const ClassId> labels,
                   const KernelSpec& spec, double c_reg);

/// Majority vote over pairwise machines; ties by summed winning decision
/// magnitude, then lowest class id.
ClassId ovo_predict(const SvmModel& model, const EventChannels& x);

struct TuneGrid {
  std::vector<double> c_values;
  std::vector<double> params{1.0};  // kernel parameter, interpreted by the spec factory
};

struct TuneResult {
  double c_reg = 1.0;
  double param = 1.0;
  double accuracy = 0.0;
  std::size_t fits = 0;
};

/// Cross-validated grid search. `folds` = 0 selects leave-one-out. Highest
/// accuracy wins; ties go to the smallest c, then the smallest param.
TuneResult tune(std::span<const EventChannels> samples, std::span<const ClassId> labels,
                const std::function<KernelSpec(double)>& make_spec, const TuneGrid& grid,
                std::size_t folds, std::uint64_t seed);

/// Stratified fold ids in [0, k) for the given labels.
std::vector<std::size_t> stratified_folds(std::span<const ClassId> labels, std::size_t k, std::uint64_t seed);

}  // namespace regbank
