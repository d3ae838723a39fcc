#include "regbank/descriptor.hpp"

#include <algorithm>
#include <numeric>

#include "regbank/parallel.hpp"

namespace regbank {

std::size_t pad_offset(std::size_t n_segments, int factor) {
  return static_cast<std::size_t>((factor - 1) / 2) * n_segments;
}

Matrix pad_sequence(const Matrix& seq, int factor) {
  if (seq.empty()) throw Error(ErrorCode::EmptyEvent, "cannot pad an empty sequence");
  if (factor < 1 || factor % 2 == 0)
    throw Error(ErrorCode::InvalidArgument, "pad factor must be a positive odd number");
  const std::size_t n = seq.rows();
  const std::size_t offset = pad_offset(n, factor);
  Matrix padded(n * static_cast<std::size_t>(factor), seq.cols(), 0.0);
  for (std::size_t i = 0; i < n; ++i) std::copy_n(seq.row(i).begin(), seq.cols(), padded.row(offset + i).begin());
  return padded;
}

std::vector<BoundaryVote> boundary_votes(const RegressorForest& forest, const Matrix& padded,
                                         std::span<const double> weights) {
  if (weights.size() != padded.rows())
    throw Error(ErrorCode::LengthMismatch, "one weight per padded segment required");
  if (padded.cols() != forest.feature_dim)
    throw Error(ErrorCode::DimensionMismatch, "segments of dimension " + std::to_string(padded.cols()) +
                                                  ", forest expects " + std::to_string(forest.feature_dim));
  const double inv_t = 1.0 / static_cast<double>(forest.trees.size());
  std::vector<BoundaryVote> votes;
  votes.reserve(padded.rows() * forest.trees.size());
  for (std::size_t i = 0; i < padded.rows(); ++i) {
    if (weights[i] == 0.0) continue;
    const double position = static_cast<double>(i);
    for (const RegressionTree& tree : forest.trees) {
      const LeafModel& leaf = route(tree, padded.row(i));
      votes.push_back({weights[i] * inv_t, position - leaf.mean_onset, leaf.var_onset,
                       position + leaf.mean_offset, leaf.var_offset});
    }
  }
  return votes;
}

ScoreCurves score_curves(const RegressorForest& forest, const Matrix& padded, std::span<const double> weights) {
  const auto votes = boundary_votes(forest, padded, weights);
  ScoreCurves curves;
  kernels::accumulate_votes(votes, padded.rows(), curves.onset, curves.offset);
  return curves;
}

ScoreCurves score_curves(const RegressorForest& forest, const MatcherModel& matcher, const Matrix& padded) {
  const Matrix post = posteriors(matcher, padded);
  std::vector<double> w(padded.rows());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = post(i, static_cast<std::size_t>(forest.class_id));
  return score_curves(forest, padded, w);
}

double phi_entry(const ScoreCurves& curves) {
  if (curves.onset.empty() || curves.offset.empty())
    throw Error(ErrorCode::InvalidArgument, "empty score curves");
  return 0.5 * (*std::max_element(curves.onset.begin(), curves.onset.end()) +
                *std::max_element(curves.offset.begin(), curves.offset.end()));
}

Matrix padded_posteriors(const MatcherModel& matcher, const Matrix& event, int pad_factor) {
  const Matrix inner = posteriors(matcher, event);
  const std::vector<double> zero(event.cols(), 0.0);
  const auto p_zero = posterior(matcher, zero);
  const std::size_t n = event.rows();
  const std::size_t offset = pad_offset(n, pad_factor);
  Matrix out(n * static_cast<std::size_t>(pad_factor), matcher.n_classes);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    const bool original = i >= offset && i < offset + n;
    const auto src = original ? inner.row(i - offset) : std::span<const double>(p_zero);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

RawDescriptor extract_descriptor(std::span<const RegressorForest> bank, const MatcherModel& matcher,
                                 const Matrix& event, int pad_factor) {
  if (event.empty()) throw Error(ErrorCode::EmptyEvent, "event has no segments");
  const Matrix padded = pad_sequence(event, pad_factor);
  const Matrix post = padded_posteriors(matcher, event, pad_factor);

  RawDescriptor out;
  out.phi.resize(bank.size());
  std::vector<double> w(padded.rows());
  for (std::size_t b = 0; b < bank.size(); ++b) {
    const auto c = static_cast<std::size_t>(bank[b].class_id);
    if (c >= matcher.n_classes)
      throw Error(ErrorCode::DimensionMismatch, "forest class outside the matcher's classes");
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = post(i, c);
    out.phi[b] = phi_entry(score_curves(bank[b], padded, w));
  }

  const std::size_t offset = pad_offset(event.rows(), pad_factor);
  out.phi_hat.assign(matcher.n_classes, 0.0);
  for (std::size_t i = 0; i < event.rows(); ++i)
    for (std::size_t c = 0; c < matcher.n_classes; ++c) out.phi_hat[c] += post(offset + i, c);
  for (double& v : out.phi_hat) v /= static_cast<double>(event.rows());
  l1_normalize(out.phi_hat);
  return out;
}

std::vector<double> extract_bor(std::span<const RegressorForest> bank, const MatcherModel& matcher,
                                const Matrix& event, int pad_factor) {
  return extract_descriptor(bank, matcher, event, pad_factor).phi;
}

std::vector<double> extract_unstructured(const MatcherModel& matcher, const Matrix& event) {
  if (event.empty()) throw Error(ErrorCode::EmptyEvent, "event has no segments");
  const Matrix post = posteriors(matcher, event);
  std::vector<double> mean(matcher.n_classes, 0.0);
  for (std::size_t i = 0; i < post.rows(); ++i)
    for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += post(i, c);
  for (double& v : mean) v /= static_cast<double>(post.rows());
  l1_normalize(mean);
  return mean;
}

void l1_normalize(std::vector<double>& v) {
  const double sum = std::accumulate(v.begin(), v.end(), 0.0);
  if (sum > 0.0)
    for (double& x : v) x /= sum;
}

NormalizationStats fit_normalizer(std::span<const std::vector<double>> training_phis) {
  if (training_phis.empty()) throw Error(ErrorCode::TooFewSamples, "normalizer needs a training descriptor");
  NormalizationStats stats;
  stats.max_phi = training_phis.front();
  for (const auto& phi : training_phis) {
    if (phi.size() != stats.max_phi.size()) throw Error(ErrorCode::DimensionMismatch, "ragged descriptors");
    for (std::size_t c = 0; c < phi.size(); ++c) stats.max_phi[c] = std::max(stats.max_phi[c], phi[c]);
  }
  return stats;
}

BorDescriptor normalize(std::span<const double> raw_phi, const NormalizationStats& stats) {
  if (raw_phi.size() != stats.max_phi.size())
    throw Error(ErrorCode::DimensionMismatch, "descriptor and normalizer differ in length");
  BorDescriptor d;
  d.phi.resize(raw_phi.size());
  for (std::size_t c = 0; c < raw_phi.size(); ++c)
    d.phi[c] = stats.max_phi[c] > 0.0 ? raw_phi[c] / stats.max_phi[c] : 0.0;
  l1_normalize(d.phi);
  d.state = NormalizationState::L1;
  return d;
}

DescriptorTable extract_training_descriptors(std::span<const LabeledEvent> events,
                                             std::span<const RegressorForest> bank, const FoldedMatchers& folded,
                                             NormalizationStats& stats, int pad_factor) {
  if (folded.event_fold.size() != events.size())
    throw Error(ErrorCode::LengthMismatch, "fold map does not cover the training events");
  DescriptorTable table;
  table.raw.resize(events.size());
  parallel_for(events.size(), [&](std::size_t e) {
    table.raw[e] = extract_descriptor(bank, folded.for_event(e), events[e].segments, pad_factor);
  });
  std::vector<std::vector<double>> phis;
  for (std::size_t e = 0; e < events.size(); ++e) {
    table.ids.push_back(events[e].id);
    table.labels.push_back(events[e].label);
    phis.push_back(table.raw[e].phi);
  }
  stats = fit_normalizer(phis);
  for (const auto& phi : phis) table.normalized.push_back(normalize(phi, stats).phi);
  return table;
}

DescriptorTable extract_descriptors(std::span<const LabeledEvent> events, std::span<const RegressorForest> bank,
                                    const MatcherModel& matcher, const NormalizationStats& stats, int pad_factor) {
  DescriptorTable table;
  table.raw.resize(events.size());
  parallel_for(events.size(), [&](std::size_t e) {
    table.raw[e] = extract_descriptor(bank, matcher, events[e].segments, pad_factor);
  });
  for (std::size_t e = 0; e < events.size(); ++e) {
    table.ids.push_back(events[e].id);
    table.labels.push_back(events[e].label);
    table.normalized.push_back(normalize(table.raw[e].phi, stats).phi);
  }
  return table;
}

}  // namespace regbank
