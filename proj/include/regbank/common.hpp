#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace regbank {

enum class ErrorCode {
  InvalidArgument,
  WaveformTooShort,
  InvalidWindow,
  EmptyClass,
  EmptySide,
  SingleClass,
  TooFewEvents,
  DimensionMismatch,
  LengthMismatch,
  NegativeEntry,
  MissingChannel,
  TooFewSamples,
  TooFewPoints,
  EmptyEvent,
  NoConvergence,
  ParseError,
  MissingFile,
  InvalidInterval,
  VersionMismatch,
  CorruptBundle,
  IoError,
};

const char* to_string(ErrorCode code);

// Process exit code for the CLI: 1 usage, 2 data, 3 convergence/training.
int exit_code(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Dense row-major matrix of doubles. Rows are segments (or samples),
/// columns are feature channels.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  // The first appended row fixes the column count of an empty matrix.
  void append_row(std::span<const double> values);

  const std::vector<double>& data() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Class ids are contiguous in [0, C).
using ClassId = int;

}  // namespace regbank
