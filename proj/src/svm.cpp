#include "regbank/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "regbank/kernels.hpp"
#include "regbank/parallel.hpp"
#include "regbank/random.hpp"

namespace regbank {

const char* to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::Linear: return "linear";
    case KernelKind::Rbf: return "rbf";
    case KernelKind::Chi2: return "chi2";
    case KernelKind::Hist: return "hist";
    case KernelKind::ExtendedGaussian: return "extended_gaussian";
  }
  return "unknown";
}

KernelKind kernel_kind_from_string(const std::string& name) {
  for (KernelKind k : {KernelKind::Linear, KernelKind::Rbf, KernelKind::Chi2, KernelKind::Hist,
                       KernelKind::ExtendedGaussian})
    if (name == to_string(k)) return k;
  throw Error(ErrorCode::InvalidArgument, "unknown kernel '" + name + "'");
}

double chi2_distance(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw Error(ErrorCode::LengthMismatch, "chi2 operands differ in length");
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] < 0.0 || v[i] < 0.0) throw Error(ErrorCode::NegativeEntry, "chi2 distance needs nonnegative entries");
    const double s = u[i] + v[i];
    if (s == 0.0) continue;
    const double diff = u[i] - v[i];
    d += diff * diff / s;
  }
  return d;
}

namespace {

const std::vector<double>& channel(const EventChannels& e, std::size_t k) {
  if (k >= e.channels.size())
    throw Error(ErrorCode::MissingChannel, "descriptor channel " + std::to_string(k) + " absent");
  return e.channels[k];
}

void check_lengths(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw Error(ErrorCode::LengthMismatch, "kernel operands differ in length");
}

}  // namespace

double kernel_eval(const KernelSpec& spec, const EventChannels& a, const EventChannels& b) {
  if (spec.kind == KernelKind::ExtendedGaussian) {
    if (spec.channel_scales.empty()) throw Error(ErrorCode::MissingChannel, "extended Gaussian without channels");
    double exponent = 0.0;
    for (std::size_t k = 0; k < spec.channel_scales.size(); ++k)
      exponent += chi2_distance(channel(a, k), channel(b, k)) / spec.channel_scales[k];
    return std::exp(-exponent);
  }
  const auto& u = channel(a, 0);
  const auto& v = channel(b, 0);
  check_lengths(u, v);
  switch (spec.kind) {
    case KernelKind::Linear: {
      double dot = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * v[i];
      return dot;
    }
    case KernelKind::Rbf: {
      double d = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) d += (u[i] - v[i]) * (u[i] - v[i]);
      return std::exp(-spec.gamma * d);
    }
    case KernelKind::Chi2:
      return std::exp(-spec.gamma * chi2_distance(u, v));
    case KernelKind::Hist: {
      double s = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) s += std::min(u[i], v[i]);
      return s;
    }
    case KernelKind::ExtendedGaussian:
      break;
  }
  return 0.0;
}

std::vector<double> channel_scales(std::span<const EventChannels> training, std::size_t n_channels) {
  if (training.size() < 2) throw Error(ErrorCode::TooFewSamples, "channel scales need two training events");
  std::vector<double> scales(n_channels, 0.0);
  const double pairs = static_cast<double>(training.size()) * static_cast<double>(training.size() - 1) / 2.0;
  for (std::size_t k = 0; k < n_channels; ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < training.size(); ++i)
      for (std::size_t j = i + 1; j < training.size(); ++j)
        sum += chi2_distance(channel(training[i], k), channel(training[j], k));
    scales[k] = std::max(sum / pairs, 1e-12);
  }
  return scales;
}

double mean_squared_distance(std::span<const EventChannels> samples) {
  if (samples.size() < 2) return 1.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      const auto& u = channel(samples[i], 0);
      const auto& v = channel(samples[j], 0);
      for (std::size_t d = 0; d < u.size(); ++d) sum += (u[d] - v[d]) * (u[d] - v[d]);
    }
  const double pairs = static_cast<double>(samples.size()) * static_cast<double>(samples.size() - 1) / 2.0;
  return std::max(sum / pairs, 1e-12);
}

double mean_chi2_distance(std::span<const EventChannels> samples) {
  if (samples.size() < 2) return 1.0;
  return channel_scales(samples, 1).front();
}

// ---------------------------------------------------------------------------
// SMO

BinarySolution smo_train_binary(const Matrix& kernel, std::span<const int> labels, const SmoConfig& cfg) {
  const std::size_t n = labels.size();
  if (kernel.rows() != n || kernel.cols() != n)
    throw Error(ErrorCode::DimensionMismatch, "Gram matrix does not match the label count");
  const bool has_pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
  const bool has_neg = std::find(labels.begin(), labels.end(), -1) != labels.end();
  if (!has_pos || !has_neg) throw Error(ErrorCode::SingleClass, "binary SVM needs both labels");
  if (!(cfg.c_reg > 0.0)) throw Error(ErrorCode::InvalidArgument, "C must be positive");

  constexpr double kTau = 1e-12;
  const double c = cfg.c_reg;
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);  // Q alpha - e
  auto y = [&](std::size_t i) { return static_cast<double>(labels[i]); };
  auto q = [&](std::size_t i, std::size_t j) { return y(i) * y(j) * kernel(i, j); };
  auto in_up = [&](std::size_t t) { return (labels[t] == 1 && alpha[t] < c) || (labels[t] == -1 && alpha[t] > 0); };
  auto in_low = [&](std::size_t t) { return (labels[t] == 1 && alpha[t] > 0) || (labels[t] == -1 && alpha[t] < c); };

  BinarySolution sol;
  for (;;) {
    // Working set: i maximizes -y G over I_up, j the second-order gain over I_low.
    double g_max = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t)
      if (in_up(t) && -y(t) * grad[t] >= g_max) {
        g_max = -y(t) * grad[t];
        i = t;
      }
    double g_min = std::numeric_limits<double>::infinity();
    double best_gain = std::numeric_limits<double>::infinity();
    std::size_t j = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      const double v = -y(t) * grad[t];
      g_min = std::min(g_min, v);
      if (i == n) continue;
      const double b = g_max - v;
      if (b <= 0.0) continue;
      double a = kernel(i, i) + kernel(t, t) - 2.0 * kernel(i, t);
      if (a <= 0.0) a = kTau;
      const double gain = -(b * b) / a;
      if (gain <= best_gain) {
        best_gain = gain;
        j = t;
      }
    }
    if (i == n || j == n || g_max - g_min < cfg.tol) break;
    if (++sol.iterations > cfg.max_iterations)
      throw Error(ErrorCode::NoConvergence, "SMO exceeded " + std::to_string(cfg.max_iterations) + " iterations");

    const double old_i = alpha[i], old_j = alpha[j];
    if (labels[i] != labels[j]) {
      double quad = kernel(i, i) + kernel(j, j) + 2.0 * q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = diff; }
      } else {
        if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = -diff; }
      }
      if (diff > 0) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = c - diff; }
      } else {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = c + diff; }
      }
    } else {
      double quad = kernel(i, i) + kernel(j, j) - 2.0 * q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = sum - c; }
      } else {
        if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = sum; }
      }
      if (sum > c) {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = sum - c; }
      } else {
        if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = sum; }
      }
    }
    const double d_i = alpha[i] - old_i, d_j = alpha[j] - old_j;
    for (std::size_t k = 0; k < n; ++k) grad[k] += q(i, k) * d_i + q(j, k) * d_j;
  }

  // rho from free vectors, else the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y(t) * grad[t];
    if (alpha[t] >= c) {
      if (labels[t] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0.0) {
      if (labels[t] == 1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      free_sum += yg;
    }
  }
  const double rho = n_free > 0 ? free_sum / static_cast<double>(n_free) : (ub + lb) / 2.0;
  sol.alpha = std::move(alpha);
  sol.bias = -rho;
  return sol;
}

double decision_value(const BinaryMachine& m, const KernelSpec& spec, const EventChannels& x) {
  double f = m.bias;
  for (std::size_t i = 0; i < m.support.size(); ++i) f += m.coef[i] * kernel_eval(spec, m.support[i], x);
  return f;
}

namespace {

struct PairSolution {
  ClassId positive = 0;
  ClassId negative = 0;
  std::vector<std::size_t> support_rows;  // rows with alpha > 0
  std::vector<double> coef;
  double bias = 0.0;
};

std::vector<ClassId> classes_of(std::span<const std::size_t> rows, std::span<const ClassId> labels) {
  std::vector<ClassId> classes;
  for (std::size_t r : rows) classes.push_back(labels[r]);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  if (classes.size() < 2) throw Error(ErrorCode::SingleClass, "SVM training needs two classes");
  return classes;
}

std::vector<PairSolution> train_pairs(const Matrix& gram, std::span<const std::size_t> rows,
                                      std::span<const ClassId> labels, const std::vector<ClassId>& classes,
                                      double c_reg) {
  SmoConfig smo;
  smo.c_reg = c_reg;
  std::vector<PairSolution> out;
  for (std::size_t a = 0; a < classes.size(); ++a) {
    for (std::size_t b = a + 1; b < classes.size(); ++b) {
      std::vector<std::size_t> members;
      std::vector<int> y;
      for (std::size_t r : rows) {
        if (labels[r] == classes[a]) {
          members.push_back(r);
          y.push_back(1);
        } else if (labels[r] == classes[b]) {
          members.push_back(r);
          y.push_back(-1);
        }
      }
      Matrix k(members.size(), members.size());
      for (std::size_t i = 0; i < members.size(); ++i)
        for (std::size_t j = 0; j < members.size(); ++j) k(i, j) = gram(members[i], members[j]);
      const BinarySolution sol = smo_train_binary(k, y, smo);

      PairSolution pair;
      pair.positive = classes[a];
      pair.negative = classes[b];
      pair.bias = sol.bias;
      for (std::size_t i = 0; i < members.size(); ++i) {
        if (sol.alpha[i] <= 0.0) continue;
        pair.support_rows.push_back(members[i]);
        pair.coef.push_back(sol.alpha[i] * y[i]);
      }
      out.push_back(std::move(pair));
    }
  }
  return out;
}

}  // namespace

SvmModel ovo_train(const Matrix& gram, std::span<const std::size_t> rows, std::span<const EventChannels> samples,
                   std::span<const ClassId> labels, const KernelSpec& spec, double c_reg) {
  if (samples.size() != labels.size()) throw Error(ErrorCode::LengthMismatch, "samples and labels differ in length");
  SvmModel model;
  model.kernel = spec;
  model.c_reg = c_reg;
  model.classes = classes_of(rows, labels);
  for (PairSolution& pair : train_pairs(gram, rows, labels, model.classes, c_reg)) {
    BinaryMachine machine;
    machine.positive = pair.positive;
    machine.negative = pair.negative;
    machine.bias = pair.bias;
    machine.coef = std::move(pair.coef);
    for (std::size_t r : pair.support_rows) machine.support.push_back(samples[r]);
    model.machines.push_back(std::move(machine));
  }
  return model;
}

SvmModel ovo_train(std::span<const EventChannels> samples, std::span<const ClassId> labels, const KernelSpec& spec,
                   double c_reg) {
  const Matrix gram = kernels::gram_matrix(samples, spec);
  std::vector<std::size_t> rows(samples.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return ovo_train(gram, rows, samples, labels, spec, c_reg);
}

namespace {

// decisions[m] belongs to the m-th (a, b) pair of `classes`, a < b.
ClassId vote(const std::vector<ClassId>& classes, std::span<const double> decisions) {
  std::map<ClassId, std::pair<int, double>> tally;  // votes, summed winning |f|
  for (ClassId c : classes) tally[c] = {0, 0.0};
  std::size_t m = 0;
  for (std::size_t a = 0; a < classes.size(); ++a) {
    for (std::size_t b = a + 1; b < classes.size(); ++b, ++m) {
      const double f = decisions[m];
      const ClassId winner = f > 0.0 ? classes[a] : classes[b];
      tally[winner].first += 1;
      tally[winner].second += std::abs(f);
    }
  }
  ClassId best = classes.front();
  for (const auto& [c, score] : tally) {
    const auto& b = tally[best];
    if (score.first > b.first || (score.first == b.first && score.second > b.second)) best = c;
  }
  return best;
}

}  // namespace

ClassId ovo_predict(const SvmModel& model, const EventChannels& x) {
  std::vector<double> decisions;
  decisions.reserve(model.machines.size());
  for (const BinaryMachine& m : model.machines) decisions.push_back(decision_value(m, model.kernel, x));
  return vote(model.classes, decisions);
}

std::vector<std::size_t> stratified_folds(std::span<const ClassId> labels, std::size_t k, std::uint64_t seed) {
  std::map<ClassId, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  Rng rng = make_stream(seed, 0x73766d);
  std::vector<std::size_t> fold(labels.size());
  std::size_t deal = 0;
  for (auto& [c, members] : by_class) {
    shuffle(rng, members);
    for (std::size_t i : members) fold[i] = deal++ % k;
  }
  return fold;
}

TuneResult tune(std::span<const EventChannels> samples, std::span<const ClassId> labels,
                const std::function<KernelSpec(double)>& make_spec, const TuneGrid& grid, std::size_t folds,
                std::uint64_t seed) {
  if (grid.c_values.empty() || grid.params.empty()) throw Error(ErrorCode::InvalidArgument, "empty tuning grid");
  const std::size_t n = samples.size();
  const bool loo = folds == 0 || folds >= n;
  const std::size_t k = loo ? n : folds;
  std::vector<std::size_t> fold;
  if (loo) {
    fold.resize(n);
    for (std::size_t i = 0; i < n; ++i) fold[i] = i;
  } else {
    fold = stratified_folds(labels, k, seed);
  }

  auto c_sorted = grid.c_values;
  auto p_sorted = grid.params;
  std::sort(c_sorted.begin(), c_sorted.end());
  std::sort(p_sorted.begin(), p_sorted.end());

  TuneResult best;
  best.accuracy = -1.0;
  for (double param : p_sorted) {
    const KernelSpec spec = make_spec(param);
    const Matrix gram = kernels::gram_matrix(samples, spec);
    for (double c : c_sorted) {
      std::size_t correct = 0;
      for (std::size_t f = 0; f < k; ++f) {
        std::vector<std::size_t> train, held;
        for (std::size_t i = 0; i < n; ++i) (fold[i] == f ? held : train).push_back(i);
        if (held.empty()) continue;
        ++best.fits;
        std::vector<ClassId> classes;
        try {
          classes = classes_of(train, labels);
        } catch (const Error&) {
          // A training part holding a single class predicts that class.
          for (std::size_t h : held) correct += labels[h] == labels[train.front()];
          continue;
        }
        const auto pairs = train_pairs(gram, train, labels, classes, c);
        for (std::size_t h : held) {
          std::vector<double> decisions;
          for (const PairSolution& pair : pairs) {
            double fv = pair.bias;
            for (std::size_t s = 0; s < pair.support_rows.size(); ++s) fv += pair.coef[s] * gram(pair.support_rows[s], h);
            decisions.push_back(fv);
          }
          correct += vote(classes, decisions) == labels[h];
        }
      }
      const double acc = static_cast<double>(correct) / static_cast<double>(n);
      const bool better =
          acc > best.accuracy ||
          (acc == best.accuracy && (c < best.c_reg || (c == best.c_reg && param < best.param)));
      if (better) {
        best.accuracy = acc;
        best.c_reg = c;
        best.param = param;
      }
    }
  }
  return best;
}

}  // namespace regbank
