#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "regbank/harness/bundle.hpp"
#include "regbank/harness/config.hpp"
#include "regbank/harness/evaluate.hpp"
#include "regbank/harness/manifest.hpp"

namespace regbank::harness {

struct PipelineConfig {
  std::uint64_t seed = 1;
  int threads = 0;  // 0 keeps the OpenMP default
  FeatureConfig features;
  RegressionForestConfig forest;
  MatcherConfig matcher;
  std::size_t matcher_folds = 10;
  int pad_factor = 5;
  std::vector<std::string> systems;
  std::size_t tune_folds = 5;  // 0 = leave-one-out
  std::vector<double> c_grid;
  std::vector<double> gamma_grid;  // multiples of 1 / (mean training distance)
  std::vector<double> bow_sizes;
  int kmeans_iters = 50;
  int pbow_levels = 2;
  std::string manifest;    // empty: synthesize from the synth.* keys
  std::string test_split;  // split value held out for testing
};

PipelineConfig pipeline_config(const Config& cfg);

/// Trains forests (one per class, full training set), the full-data matcher,
/// folded matchers and the fold-complement training descriptors.
Bundle train_front_end(const std::vector<LabeledEvent>& train, const std::vector<std::string>& classes,
                       const PipelineConfig& cfg, const std::string& config_dump);

/// Descriptors of new events with the full-data matcher.
DescriptorTable describe(const Bundle& b, const std::vector<LabeledEvent>& events);

/// Shared k-means codebooks, keyed by codebook size.
struct CodebookCache {
  Standardizer standardizer;
  std::map<std::size_t, Codebook> codebooks;
};

/// Fits one named system. `train` (segment features) is only needed by the
/// bag-of-words systems; pass a cache to share codebooks between them.
FittedSystem fit_system(const std::string& name, const Bundle& b, const std::vector<LabeledEvent>& train,
                        const PipelineConfig& cfg, CodebookCache* cache = nullptr);

std::vector<ClassId> predict_system(const FittedSystem& s, const Bundle& b, const DescriptorTable& table,
                                    const std::vector<LabeledEvent>& events);

struct PipelineResult {
  std::vector<EvaluationReport> reports;
  Bundle bundle;
  std::vector<std::string> test_ids;
};

/// Full run on prepared events (features already computed). Errors are
/// re-thrown with the failing stage named.
PipelineResult run_pipeline(const PipelineConfig& cfg, const std::vector<LabeledEvent>& train,
                            const std::vector<LabeledEvent>& test, const std::vector<std::string>& classes,
                            const std::string& config_dump, std::ostream* log = nullptr);

struct Dataset {
  std::vector<std::string> classes;
  std::vector<EventInstance> train;
  std::vector<EventInstance> test;
};

/// Events from the configured manifest, or synthesized when none is set.
/// Waveforms only; features are computed per run.
Dataset load_dataset(const Config& cfg);

PipelineResult run_pipeline(const Config& cfg, std::ostream* log = nullptr);

struct SweepRow {
  double win_ms = 0.0;
  bool ok = false;
  std::string error;
  std::vector<EvaluationReport> reports;
};

std::vector<SweepRow> sweep_segment_size(const Config& cfg, const std::vector<double>& sizes,
                                         std::ostream* log = nullptr);

/// One row per size: win_ms, status, then accuracy per system.
void write_sweep(std::ostream& out, const std::vector<SweepRow>& rows, const std::vector<std::string>& systems);

/// Score curves of the class-`class_id` forest over the padded grid, as
/// rows (n, time_ms, f_plus, f_minus); time is relative to the event onset.
ScoreCurves emit_curves(const Matrix& event, ClassId class_id, const Bundle& b, const std::string& path);

std::vector<std::string> default_systems();

}  // namespace regbank::harness
