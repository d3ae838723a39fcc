#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "regbank/baselines.hpp"
#include "regbank/descriptor.hpp"
#include "regbank/features.hpp"
#include "regbank/svm.hpp"

namespace regbank::harness {

inline constexpr int kBundleVersion = 1;

/// A trained classifier on top of the shared front end. `input` selects the
/// event representation: "phi", "phi_hat", "fusion" (phi and phi_hat as two
/// channels), "bow", "pbow", or "max_vote" (no SVM).
struct FittedSystem {
  std::string input;
  SvmModel svm;
  Codebook codebook;          // bow / pbow
  Standardizer standardizer;  // bow / pbow
  int pyramid_levels = 1;
  std::vector<std::pair<std::string, std::string>> params;

  bool operator==(const FittedSystem&) const = default;
};

struct Bundle {
  std::string config;  // dump of the configuration used
  std::vector<std::string> classes;
  FeatureConfig features;
  int pad_factor = 5;
  std::vector<RegressorForest> forests;
  MatcherModel matcher;  // full training data
  NormalizationStats normalizer;
  DescriptorTable training;  // fold-complement descriptors of the training events
  std::map<std::string, FittedSystem> systems;
};

std::uint64_t fnv1a64(std::string_view bytes);

/// `REGBANK-BUNDLE <version> <checksum>` then the JSON payload.
std::string serialize_bundle(const Bundle& b);
Bundle parse_bundle(const std::string& text);

void save_bundle(const std::string& path, const Bundle& b);
Bundle load_bundle(const std::string& path);

}  // namespace regbank::harness
