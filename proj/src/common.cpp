#include "regbank/common.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "regbank/random.hpp"

namespace regbank {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::WaveformTooShort: return "WaveformTooShort";
    case ErrorCode::InvalidWindow: return "InvalidWindow";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::EmptySide: return "EmptySide";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::TooFewEvents: return "TooFewEvents";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::MissingChannel: return "MissingChannel";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::EmptyEvent: return "EmptyEvent";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::InvalidInterval: return "InvalidInterval";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::CorruptBundle: return "CorruptBundle";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidWindow:
      return 1;
    case ErrorCode::NoConvergence:
    case ErrorCode::SingleClass:
    case ErrorCode::EmptyClass:
    case ErrorCode::EmptySide:
    case ErrorCode::TooFewEvents:
    case ErrorCode::TooFewSamples:
    case ErrorCode::TooFewPoints:
      return 3;
    default:
      return 2;
  }
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void Matrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  if (values.size() != cols_)
    throw Error(ErrorCode::DimensionMismatch,
                "row of width " + std::to_string(values.size()) + " appended to matrix of width " +
                    std::to_string(cols_));
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

// ---------------------------------------------------------------------------
// random

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  return Rng(mix64(mix64(seed) ^ mix64(stream + 0x632be59bd9b4e019ULL)));
}

Rng make_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream) {
  return make_stream(mix64(seed) ^ mix64(stream * 0x9e3779b97f4a7c15ULL + 1), substream);
}

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform_real(Rng& rng, double lo, double hi) {
  if (lo == hi) return lo;
  double v = lo + (hi - lo) * uniform01(rng);
  return std::clamp(v, lo, hi);
}

std::size_t uniform_index(Rng& rng, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "uniform_index over an empty range");
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return static_cast<std::size_t>(r % bound);
}

double standard_normal(Rng& rng) {
  double u1 = uniform01(rng);
  double u2 = uniform01(rng);
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n, std::size_t k) {
  if (k > n) throw Error(ErrorCode::InvalidArgument, "sample size exceeds population");
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + uniform_index(rng, n - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace regbank
