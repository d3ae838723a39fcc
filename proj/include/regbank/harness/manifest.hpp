#pragma once

#include <optional>
#include <string>
#include <vector>

#include "regbank/features.hpp"
#include "regbank/regforest.hpp"

namespace regbank::harness {

struct ManifestEntry {
  std::string path;  // as written; relative paths resolve against the manifest directory
  double onset_s = 0.0;
  double offset_s = 0.0;
  std::string class_name;
  std::string split;  // "train", "test", a session id, or empty
  std::optional<ClassId> label;

  bool operator==(const ManifestEntry&) const = default;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::vector<std::string> classes;  // id -> name
  std::string base_dir;

  std::string resolve(const ManifestEntry& e) const;
  std::optional<ClassId> class_id(const std::string& name) const;
  bool operator==(const DatasetManifest&) const = default;
};

/// Header `path,onset_s,offset_s,class[,split]`. Without `known_classes` the
/// class dictionary is the sorted set of names in the file; with it, names
/// outside the dictionary load with no label.
DatasetManifest load_manifest(const std::string& path, const std::vector<std::string>* known_classes = nullptr);

void save_manifest(const std::string& path, const DatasetManifest& m);

/// An event ready for the models: either a waveform or precomputed segment
/// features, never both.
struct EventInstance {
  std::string id;
  std::optional<ClassId> label;
  std::optional<Waveform> waveform;
  std::optional<Matrix> features;
  std::string split;
};

/// Events of the manifest whose split is in `splits` (all when empty), with
/// their waveforms cut to [onset, offset) at 16 kHz.
std::vector<EventInstance> load_events(const DatasetManifest& m, const std::vector<std::string>& splits = {});

/// Replaces every waveform by its segment features (in parallel, order kept).
void compute_features(std::vector<EventInstance>& events, const FeatureConfig& cfg);

/// Labeled events for training; throws InvalidArgument when a label is
/// missing or features were not computed.
std::vector<LabeledEvent> to_labeled(const std::vector<EventInstance>& events);

std::string format_real(double v);

}  // namespace regbank::harness
