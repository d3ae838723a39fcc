#pragma once

#include <span>
#include <string>
#include <vector>

#include "regbank/common.hpp"
#include "regbank/kernels.hpp"
#include "regbank/matcher.hpp"
#include "regbank/regforest.hpp"

namespace regbank {

/// Onset and offset confidence over the padded segment grid.
struct ScoreCurves {
  std::vector<double> onset;
  std::vector<double> offset;
};

enum class NormalizationState { Raw, MaxNormalized, L1 };

struct BorDescriptor {
  std::vector<double> phi;
  std::vector<double> phi_hat;  // empty when not requested
  NormalizationState state = NormalizationState::Raw;
};

struct NormalizationStats {
  std::vector<double> max_phi;

  bool operator==(const NormalizationStats&) const = default;
};

/// Zero segments around the sequence: (factor-1)/2 * N on each side, so the
/// originals occupy [(factor-1)/2 * N, (factor+1)/2 * N). factor must be odd.
Matrix pad_sequence(const Matrix& seq, int factor = 5);

/// Offset of the first original segment inside the padded grid.
std::size_t pad_offset(std::size_t n_segments, int factor);

/// Per (segment, tree) votes, weighted by weight[i] / T.
std::vector<BoundaryVote> boundary_votes(const RegressorForest& forest, const Matrix& padded,
                                         std::span<const double> weights);

ScoreCurves score_curves(const RegressorForest& forest, const Matrix& padded, std::span<const double> weights);

/// Weights are the matcher posteriors for the forest's class.
ScoreCurves score_curves(const RegressorForest& forest, const MatcherModel& matcher, const Matrix& padded);

/// Half the sum of the two curve maxima.
double phi_entry(const ScoreCurves& curves);

struct RawDescriptor {
  std::vector<double> phi;
  std::vector<double> phi_hat;

  bool operator==(const RawDescriptor&) const = default;
};

/// Posterior rows for a padded sequence; zero rows share one evaluation.
Matrix padded_posteriors(const MatcherModel& matcher, const Matrix& event, int pad_factor);

/// phi (regressor bank responses) and phi_hat (mean posterior) for one
/// event. bank[c] must be the forest of class c.
RawDescriptor extract_descriptor(std::span<const RegressorForest> bank, const MatcherModel& matcher,
                                 const Matrix& event, int pad_factor = 5);

std::vector<double> extract_bor(std::span<const RegressorForest> bank, const MatcherModel& matcher,
                                const Matrix& event, int pad_factor = 5);

/// Mean segment posterior over the unpadded event, l1-normalized.
std::vector<double> extract_unstructured(const MatcherModel& matcher, const Matrix& event);

NormalizationStats fit_normalizer(std::span<const std::vector<double>> training_phis);

/// Divide by the training maxima (zero maxima map to 0), then l1-normalize
/// when the sum is positive. No clamping.
BorDescriptor normalize(std::span<const double> raw_phi, const NormalizationStats& stats);

void l1_normalize(std::vector<double>& v);

struct DescriptorTable {
  std::vector<std::string> ids;
  std::vector<ClassId> labels;
  std::vector<RawDescriptor> raw;
  std::vector<std::vector<double>> normalized;
};

/// Descriptors for training events. Posteriors for an event come from the
/// matcher that did not see its fold; the bank is the full-data bank.
/// Fits `stats` on the resulting raw phis.
DescriptorTable extract_training_descriptors(std::span<const LabeledEvent> events,
                                             std::span<const RegressorForest> bank, const FoldedMatchers& folded,
                                             NormalizationStats& stats, int pad_factor = 5);

/// Descriptors for held-out events with the full-data matcher.
DescriptorTable extract_descriptors(std::span<const LabeledEvent> events, std::span<const RegressorForest> bank,
                                    const MatcherModel& matcher, const NormalizationStats& stats,
                                    int pad_factor = 5);

}  // namespace regbank
