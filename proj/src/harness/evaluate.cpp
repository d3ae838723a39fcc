#include "regbank/harness/evaluate.hpp"

#include <ostream>

#include "regbank/harness/manifest.hpp"

namespace regbank::harness {

EvaluationReport evaluate(std::span<const ClassId> predictions, std::span<const ClassId> truths,
                          std::size_t n_classes) {
  if (predictions.size() != truths.size())
    throw Error(ErrorCode::LengthMismatch, "predictions and truths differ in length");
  if (truths.empty()) throw Error(ErrorCode::InvalidArgument, "nothing to evaluate");
  EvaluationReport r;
  r.confusion.assign(n_classes, std::vector<std::size_t>(n_classes, 0));
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const auto t = static_cast<std::size_t>(truths[i]);
    const auto p = static_cast<std::size_t>(predictions[i]);
    if (truths[i] < 0 || predictions[i] < 0 || t >= n_classes || p >= n_classes)
      throw Error(ErrorCode::InvalidArgument, "class id out of range");
    ++r.confusion[t][p];
  }
  std::size_t correct = 0;
  for (std::size_t c = 0; c < n_classes; ++c) correct += r.confusion[c][c];
  r.accuracy = static_cast<double>(correct) / static_cast<double>(truths.size());

  for (std::size_t c = 0; c < n_classes; ++c) {
    std::size_t predicted = 0, actual = 0;
    for (std::size_t k = 0; k < n_classes; ++k) {
      predicted += r.confusion[k][c];
      actual += r.confusion[c][k];
    }
    const double tp = static_cast<double>(r.confusion[c][c]);
    const double p = predicted ? tp / static_cast<double>(predicted) : 0.0;
    const double rc = actual ? tp / static_cast<double>(actual) : 0.0;
    r.precision.push_back(p);
    r.recall.push_back(rc);
    r.f1.push_back(p + rc > 0.0 ? 2.0 * p * rc / (p + rc) : 0.0);
    r.macro_f1 += r.f1.back();
  }
  r.macro_f1 /= static_cast<double>(n_classes);
  return r;
}

void write_report(std::ostream& out, const std::vector<EvaluationReport>& reports,
                  const std::vector<std::string>& class_names, const std::string& config_dump) {
  auto name = [&](std::size_t c) { return c < class_names.size() ? class_names[c] : std::to_string(c); };
  for (const auto& r : reports) {
    out << "system\t" << r.system << '\n';
    out << "accuracy\t" << format_real(r.accuracy) << '\n';
    out << "macro_f1\t" << format_real(r.macro_f1) << '\n';
    for (const auto& [k, v] : r.config) out << "param\t" << k << '\t' << v << '\n';
    out << "class\tprecision\trecall\tf1\tsupport\n";
    for (std::size_t c = 0; c < r.f1.size(); ++c) {
      std::size_t support = 0;
      for (std::size_t k : r.confusion[c]) support += k;
      out << name(c) << '\t' << format_real(r.precision[c]) << '\t' << format_real(r.recall[c]) << '\t'
          << format_real(r.f1[c]) << '\t' << support << '\n';
    }
    out << "confusion";
    for (std::size_t c = 0; c < r.confusion.size(); ++c) out << '\t' << name(c);
    out << '\n';
    for (std::size_t c = 0; c < r.confusion.size(); ++c) {
      out << name(c);
      for (std::size_t k : r.confusion[c]) out << '\t' << k;
      out << '\n';
    }
    out << '\n';
  }
  out << "config\n" << config_dump;
}

}  // namespace regbank::harness
