#pragma once

// JSON mapping of every persisted model type. Reals are written in shortest
// round-trip form, so load(save(x)) reproduces every stored double bit for
// bit.

#include <json.hpp>

#include "regbank/baselines.hpp"
#include "regbank/descriptor.hpp"
#include "regbank/matcher.hpp"
#include "regbank/regforest.hpp"
#include "regbank/svm.hpp"

namespace regbank {

using Json = nlohmann::json;

void to_json(Json& j, const Matrix& m);
void from_json(const Json& j, Matrix& m);

void to_json(Json& j, const RegressionForestConfig& c);
void from_json(const Json& j, RegressionForestConfig& c);
void to_json(Json& j, const RegressorForest& f);
void from_json(const Json& j, RegressorForest& f);

void to_json(Json& j, const MatcherConfig& c);
void from_json(const Json& j, MatcherConfig& c);
void to_json(Json& j, const MatcherModel& m);
void from_json(const Json& j, MatcherModel& m);

void to_json(Json& j, const KernelSpec& k);
void from_json(const Json& j, KernelSpec& k);
void to_json(Json& j, const SvmModel& m);
void from_json(const Json& j, SvmModel& m);

void to_json(Json& j, const Codebook& c);
void from_json(const Json& j, Codebook& c);
void to_json(Json& j, const Standardizer& s);
void from_json(const Json& j, Standardizer& s);
void to_json(Json& j, const NormalizationStats& s);
void from_json(const Json& j, NormalizationStats& s);

}  // namespace regbank
