#include "regbank/features.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

namespace regbank {

FrameGeometry frame_geometry(int sample_rate, double win_ms, double overlap_ms) {
  if (sample_rate <= 0) throw Error(ErrorCode::InvalidArgument, "sample rate must be positive");
  if (!(win_ms > overlap_ms) || overlap_ms < 0.0)
    throw Error(ErrorCode::InvalidWindow, "need win_ms > overlap_ms >= 0 (got " +
                                              std::to_string(win_ms) + ", " +
                                              std::to_string(overlap_ms) + ")");
  const auto window = static_cast<std::size_t>(std::llround(win_ms * sample_rate / 1000.0));
  const auto overlap = static_cast<std::size_t>(std::llround(overlap_ms * sample_rate / 1000.0));
  if (window < 2 || overlap >= window)
    throw Error(ErrorCode::InvalidWindow, "window too small for the sample rate");
  return {window, window - overlap};
}

std::size_t frame_count(std::size_t n_samples, const FrameGeometry& geom) {
  if (n_samples < geom.window) return 0;
  return (n_samples - geom.window) / geom.hop + 1;
}

std::vector<std::vector<double>> segment_signal(const Waveform& w, double win_ms, double overlap_ms) {
  const FrameGeometry geom = frame_geometry(w.sample_rate, win_ms, overlap_ms);
  if (w.samples.size() < geom.window)
    throw Error(ErrorCode::WaveformTooShort, std::to_string(w.samples.size()) +
                                                 " samples, one window needs " +
                                                 std::to_string(geom.window));
  const std::size_t n = frame_count(w.samples.size(), geom);
  std::vector<std::vector<double>> frames;
  frames.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto first = w.samples.begin() + static_cast<std::ptrdiff_t>(i * geom.hop);
    frames.emplace_back(first, first + static_cast<std::ptrdiff_t>(geom.window));
  }
  return frames;
}

std::vector<double> power_spectrum(std::span<const double> frame, bool hamming) {
  const std::size_t n = frame.size();
  std::vector<double> input(frame.begin(), frame.end());
  if (hamming && n > 1) {
    for (std::size_t i = 0; i < n; ++i)
      input[i] *= 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                         static_cast<double>(n - 1));
  }
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, input);
  std::vector<double> power(n / 2 + 1);
  for (std::size_t k = 0; k < power.size(); ++k) power[k] = std::norm(spectrum[k]);
  return power;
}

namespace {

std::vector<double> filter_edges(int n_bands, int sample_rate, double f_min) {
  const double f_max = sample_rate / 2.0;
  const int points = n_bands + 2;
  std::vector<double> edges(static_cast<std::size_t>(points));
  const double log_lo = std::log(f_min);
  const double log_hi = std::log(f_max);
  for (int i = 0; i < points; ++i)
    edges[static_cast<std::size_t>(i)] = std::exp(log_lo + (log_hi - log_lo) * i / (points - 1));
  return edges;
}

}  // namespace

std::vector<double> filter_bank_centers(int n_bands, int sample_rate, double f_min) {
  auto edges = filter_edges(n_bands, sample_rate, f_min);
  return {edges.begin() + 1, edges.end() - 1};
}

std::vector<double> filter_bank_energies(std::span<const double> spectrum, std::size_t frame_len,
                                         int n_bands, int sample_rate, double f_min) {
  if (n_bands < 1) throw Error(ErrorCode::InvalidArgument, "n_bands must be >= 1");
  const auto edges = filter_edges(n_bands, sample_rate, f_min);
  const double bin_hz = static_cast<double>(sample_rate) / static_cast<double>(frame_len);
  std::vector<double> energies(static_cast<std::size_t>(n_bands), 0.0);
  for (int b = 0; b < n_bands; ++b) {
    const double lo = edges[b], center = edges[b + 1], hi = edges[b + 2];
    double acc = 0.0;
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      if (f <= lo || f >= hi) continue;
      const double weight = f <= center ? (f - lo) / (center - lo) : (hi - f) / (hi - center);
      acc += weight * spectrum[k];
    }
    energies[static_cast<std::size_t>(b)] = acc;
  }
  return energies;
}

std::vector<double> log_filter_bank(std::span<const double> frame, int n_bands, int sample_rate,
                                    const FeatureConfig& cfg) {
  if (frame.size() < 2) throw Error(ErrorCode::InvalidArgument, "frame needs at least 2 samples");
  const auto spectrum = power_spectrum(frame, cfg.hamming);
  auto energies = filter_bank_energies(spectrum, frame.size(), n_bands, sample_rate, cfg.f_min);
  for (double& e : energies) e = std::log(e + cfg.log_floor);
  return energies;
}

Matrix temporal_derivatives(const Matrix& seq, int order) {
  if (seq.empty()) throw Error(ErrorCode::InvalidArgument, "derivative of an empty sequence");
  if (order != 1 && order != 2) throw Error(ErrorCode::InvalidArgument, "order must be 1 or 2");
  constexpr int kHalf = 2;
  constexpr double kNorm = 2.0 * (1 * 1 + 2 * 2);
  const auto n = static_cast<std::ptrdiff_t>(seq.rows());
  auto clamp_row = [n](std::ptrdiff_t i) {
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, n - 1));
  };
  Matrix delta(seq.rows(), seq.cols());
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    for (std::size_t c = 0; c < seq.cols(); ++c) {
      double acc = 0.0;
      for (int k = 1; k <= kHalf; ++k) acc += k * (seq(clamp_row(t + k), c) - seq(clamp_row(t - k), c));
      delta(static_cast<std::size_t>(t), c) = acc / kNorm;
    }
  }
  return order == 1 ? delta : temporal_derivatives(delta, 1);
}

FrameScalars frame_scalars(std::span<const double> frame, int sample_rate, bool hamming) {
  if (frame.size() < 2) throw Error(ErrorCode::InvalidArgument, "frame needs at least 2 samples");
  FrameScalars s;
  std::size_t crossings = 0;
  double energy = 0.0;
  for (std::size_t i = 0; i < frame.size(); ++i) {
    energy += frame[i] * frame[i];
    if (i > 0 && ((frame[i - 1] < 0.0) != (frame[i] < 0.0))) ++crossings;
  }
  s.zcr = static_cast<double>(crossings) / static_cast<double>(frame.size() - 1);
  s.short_time_energy = energy / static_cast<double>(frame.size());

  const auto spectrum = power_spectrum(frame, hamming);
  const double nyquist = sample_rate / 2.0;
  const double bin_hz = static_cast<double>(sample_rate) / static_cast<double>(frame.size());
  double total = 0.0, weighted = 0.0;
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    const double f = static_cast<double>(k) * bin_hz;
    const auto band = std::min<std::size_t>(3, static_cast<std::size_t>(f / nyquist * 4.0));
    s.subband_energy[band] += spectrum[k];
    total += spectrum[k];
    weighted += f * spectrum[k];
  }
  if (total > 0.0) {
    s.spectral_centroid = weighted / total;
    double spread = 0.0;
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
      const double df = static_cast<double>(k) * bin_hz - s.spectral_centroid;
      spread += df * df * spectrum[k];
    }
    s.spectral_bandwidth = std::sqrt(spread / total);
  }
  return s;
}

Matrix extract_event_features(const Waveform& w, const FeatureConfig& cfg) {
  const auto frames = segment_signal(w, cfg.win_ms, cfg.overlap_ms);
  const auto bands = static_cast<std::size_t>(cfg.n_bands);

  Matrix bank(frames.size(), bands);
  std::vector<FrameScalars> scalars(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto coeffs = log_filter_bank(frames[i], cfg.n_bands, w.sample_rate, cfg);
    std::copy(coeffs.begin(), coeffs.end(), bank.row(i).begin());
    scalars[i] = frame_scalars(frames[i], w.sample_rate, cfg.hamming);
  }
  const Matrix d1 = temporal_derivatives(bank, 1);
  const Matrix d2 = temporal_derivatives(d1, 1);

  Matrix out(frames.size(), cfg.dimension());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    auto row = out.row(i);
    std::size_t c = 0;
    for (std::size_t b = 0; b < bands; ++b) row[c++] = bank(i, b);
    for (std::size_t b = 0; b < bands; ++b) row[c++] = d1(i, b);
    for (std::size_t b = 0; b < bands; ++b) row[c++] = d2(i, b);
    const FrameScalars& s = scalars[i];
    row[c++] = s.zcr;
    row[c++] = s.short_time_energy;
    for (double e : s.subband_energy) row[c++] = e;
    row[c++] = s.spectral_centroid;
    row[c++] = s.spectral_bandwidth;
  }
  return out;
}

}  // namespace regbank
