#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "regbank/common.hpp"

namespace regbank::harness {

struct EvaluationReport {
  std::string system;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> f1;
  std::vector<std::vector<std::size_t>> confusion;  // [truth][prediction]
  std::vector<std::pair<std::string, std::string>> config;  // selected hyperparameters etc.
  double seconds = 0.0;  // wall time; logged, never written to report files
};

/// Scores predictions against truths over classes [0, n_classes). F1 is 0
/// for a class with precision + recall = 0; macro-F1 averages over all
/// n_classes.
EvaluationReport evaluate(std::span<const ClassId> predictions, std::span<const ClassId> truths,
                          std::size_t n_classes);

/// Tab-separated report: one `system` block per report with summary, per
/// class and confusion rows, followed by the run configuration.
void write_report(std::ostream& out, const std::vector<EvaluationReport>& reports,
                  const std::vector<std::string>& class_names, const std::string& config_dump);

}  // namespace regbank::harness
