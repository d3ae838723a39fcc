#include "regbank/harness/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <vector>

namespace regbank::harness {

namespace {

std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

void put32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

}  // namespace

Waveform read_wav(const std::string& path, int target_rate) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::MissingFile, "no such file: " + path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto bad = [&](const std::string& why) { return Error(ErrorCode::ParseError, path + ": " + why); };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw bad("not a RIFF/WAVE file");

  int channels = 0, rate = 0, bits = 0;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t len = le32(&bytes[pos + 4]);
    const unsigned char* body = &bytes[pos + 8];
    const std::size_t avail = bytes.size() - pos - 8;
    if (std::memcmp(&bytes[pos], "fmt ", 4) == 0) {
      if (len < 16 || avail < 16) throw bad("short fmt chunk");
      const std::uint16_t format = le16(body);
      if (format != 1 && format != 0xFFFE) throw bad("only PCM is supported");
      channels = le16(body + 2);
      rate = static_cast<int>(le32(body + 4));
      bits = le16(body + 14);
    } else if (std::memcmp(&bytes[pos], "data", 4) == 0) {
      data = body;
      data_len = std::min<std::size_t>(len, avail);
    }
    pos += 8 + len + (len & 1u);
  }
  if (channels <= 0 || rate <= 0) throw bad("missing fmt chunk");
  if (bits != 16) throw bad("only 16-bit PCM is supported");
  if (!data) throw bad("missing data chunk");

  const std::size_t frames = data_len / (2 * static_cast<std::size_t>(channels));
  Waveform w;
  w.sample_rate = rate;
  w.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) {
      const auto raw = static_cast<std::int16_t>(le16(data + 2 * (i * channels + c)));
      acc += raw / 32768.0;
    }
    w.samples[i] = acc / channels;
  }
  return rate == target_rate ? w : resample_linear(w, target_rate);
}

void write_wav(const std::string& path, const Waveform& w) {
  std::vector<unsigned char> out;
  const auto n = static_cast<std::uint32_t>(w.samples.size());
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put32(out, 36 + 2 * n);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put32(out, 16);
  put16(out, 1);
  put16(out, 1);
  put32(out, static_cast<std::uint32_t>(w.sample_rate));
  put32(out, static_cast<std::uint32_t>(w.sample_rate) * 2);
  put16(out, 2);
  put16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put32(out, 2 * n);
  for (double s : w.samples) {
    const double q = std::round(std::clamp(s, -1.0, 1.0) * 32767.0);
    put16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path);
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error(ErrorCode::IoError, "short write to " + path);
}

Waveform resample_linear(const Waveform& w, int target_rate) {
  if (target_rate <= 0 || w.sample_rate <= 0) throw Error(ErrorCode::InvalidArgument, "sample rate must be positive");
  if (w.sample_rate == target_rate || w.samples.empty()) return {w.samples, target_rate};
  const double ratio = static_cast<double>(w.sample_rate) / target_rate;
  const auto n_out = static_cast<std::size_t>(std::floor((w.samples.size() - 1) / ratio)) + 1;
  Waveform out;
  out.sample_rate = target_rate;
  out.samples.resize(n_out);
  for (std::size_t i = 0; i < n_out; ++i) {
    const double t = i * ratio;
    const auto k = static_cast<std::size_t>(t);
    const double frac = t - static_cast<double>(k);
    const double a = w.samples[k];
    const double b = k + 1 < w.samples.size() ? w.samples[k + 1] : a;
    out.samples[i] = a + frac * (b - a);
  }
  return out;
}

Waveform slice(const Waveform& w, double onset_s, double offset_s) {
  if (!(onset_s < offset_s) || onset_s < 0.0) throw Error(ErrorCode::InvalidInterval, "onset must precede offset");
  const auto lo = static_cast<std::size_t>(std::llround(onset_s * w.sample_rate));
  const auto hi = std::min(w.samples.size(), static_cast<std::size_t>(std::llround(offset_s * w.sample_rate)));
  if (lo >= hi) throw Error(ErrorCode::InvalidInterval, "interval lies outside the recording");
  return {std::vector<double>(w.samples.begin() + static_cast<std::ptrdiff_t>(lo),
                             w.samples.begin() + static_cast<std::ptrdiff_t>(hi)),
          w.sample_rate};
}

}  // namespace regbank::harness
