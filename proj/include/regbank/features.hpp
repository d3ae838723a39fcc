#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "regbank/common.hpp"

namespace regbank {

struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;
};

struct FeatureConfig {
  double win_ms = 50.0;
  double overlap_ms = 10.0;
  int n_bands = 16;
  double f_min = 64.0;
  double log_floor = 1e-10;
  bool hamming = true;

  // filter bank + deltas + delta-deltas, then zcr, energy, 4 subbands,
  // centroid, bandwidth
  std::size_t dimension() const { return 3 * static_cast<std::size_t>(n_bands) + 8; }
};

struct FrameGeometry {
  std::size_t window = 0;
  std::size_t hop = 0;
};

FrameGeometry frame_geometry(int sample_rate, double win_ms, double overlap_ms);

/// Number of full frames; the trailing partial window is dropped.
std::size_t frame_count(std::size_t n_samples, const FrameGeometry& geom);

std::vector<std::vector<double>> segment_signal(const Waveform& w, double win_ms, double overlap_ms);

/// One-sided power spectrum |X_k|^2, k = 0..len/2, optionally Hamming-windowed.
std::vector<double> power_spectrum(std::span<const double> frame, bool hamming);

/// Center frequencies (Hz) of the log-spaced triangular filters.
std::vector<double> filter_bank_centers(int n_bands, int sample_rate, double f_min);

/// Triangular filter energies before the log. `frame_len` is the length of
/// the frame the spectrum came from.
std::vector<double> filter_bank_energies(std::span<const double> spectrum, std::size_t frame_len,
                                         int n_bands, int sample_rate, double f_min);

std::vector<double> log_filter_bank(std::span<const double> frame, int n_bands, int sample_rate,
                                    const FeatureConfig& cfg = {});

/// Regression-window deltas along the sequence (rows), +-2 with edge
/// replication. Order 2 is the delta of the order-1 result.
Matrix temporal_derivatives(const Matrix& seq, int order);

struct FrameScalars {
  double zcr = 0.0;
  double short_time_energy = 0.0;
  std::array<double, 4> subband_energy{};
  double spectral_centroid = 0.0;
  double spectral_bandwidth = 0.0;
};

FrameScalars frame_scalars(std::span<const double> frame, int sample_rate, bool hamming = true);

/// Per-segment feature rows for a whole event, dimension cfg.dimension().
Matrix extract_event_features(const Waveform& w, const FeatureConfig& cfg = {});

}  // namespace regbank
