#pragma once

#include <string>

#include "regbank/features.hpp"

namespace regbank::harness {

/// Reads a PCM 16-bit WAV. Multi-channel audio is averaged to mono and any
/// other rate is resampled to `target_rate` (linear interpolation).
Waveform read_wav(const std::string& path, int target_rate = 16000);

/// Mono PCM 16-bit; samples are clipped to [-1, 1] before quantization.
void write_wav(const std::string& path, const Waveform& w);

Waveform resample_linear(const Waveform& w, int target_rate);

/// Samples in [onset_s, offset_s), rounded to the nearest sample.
Waveform slice(const Waveform& w, double onset_s, double offset_s);

}  // namespace regbank::harness
