#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "regbank/features.hpp"
#include "regbank/harness/config.hpp"
#include "regbank/harness/manifest.hpp"

namespace regbank::harness {

struct SynthSpec {
  int n_classes = 5;
  int events_per_class = 100;
  int units_per_class = 5;
  double unit_ms = 150.0;
  // Silence between units. Longer than the reach of second-order deltas
  // (about 370 ms at default framing), so no segment sees two units.
  double gap_ms = 450.0;
  double lead_ms = 100.0;      // silence around the event inside its recording
  double jitter = 0.15;        // relative half-range of unit/gap duration jitter
  double noise_sigma = 0.02;   // additive white noise
  bool shared_histogram = true;
  double train_fraction = 0.5;
  int sample_rate = 16000;
};

SynthSpec synth_spec_from(const Config& cfg);

struct SynthEvent {
  std::string id;
  ClassId label = 0;
  std::string split;
  Waveform recording;
  double onset_s = 0.0;
  double offset_s = 0.0;
};

struct SynthDataset {
  std::vector<std::string> classes;
  std::vector<std::vector<int>> unit_order;  // per class, the unit ids in play order
  std::vector<SynthEvent> events;
};

/// Classes are ordered unit sequences. In shared-histogram mode every class
/// plays the same units in a different order (first and last unit fixed when
/// there are at least three); otherwise each class owns its units. Event recordings carry `lead_ms` of silence (plus noise) on both
/// sides of the event.
SynthDataset synth_dataset(const SynthSpec& spec, std::uint64_t seed);

/// The noise-free, jitter-free event of a class (no surrounding silence).
Waveform class_template(const SynthSpec& spec, const std::vector<int>& unit_order);

/// One unit: a harmonic chirp with raised-cosine fades, every other unit
/// amplitude-modulated. `n_units` fixes the frequency layout.
std::vector<double> unit_waveform(int unit, int n_units, std::size_t length, int sample_rate);

/// Events cut to their intervals, with labels and splits.
std::vector<EventInstance> to_instances(const SynthDataset& ds);

/// `<dir>/<id>.wav` per event plus `<dir>/manifest.csv`; returns the manifest path.
std::string write_dataset(const SynthDataset& ds, const std::string& dir);

}  // namespace regbank::harness
