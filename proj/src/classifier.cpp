#include "sldx/classifier.hpp"

#include "sldx/error.hpp"

namespace sldx {

FeatureSet critical_features() { return {FeatureId::F1, FeatureId::F9}; }

FeatureSet non_critical_features() {
  return {FeatureId::F2, FeatureId::F3, FeatureId::F4, FeatureId::F5,
          FeatureId::F6, FeatureId::F7, FeatureId::F8, FeatureId::F10};
}

BinaryLabel classify_features(const FeatureSet& fs) {
  if (!(fs & critical_features()).empty()) return BinaryLabel::One;
  return label_from_bool((fs & non_critical_features()).size() > kCumulativeThreshold);
}

VerdictAggregate aggregate_verdicts(std::span<const VerdictValue> verdicts) {
  if (verdicts.empty()) throw Error(ErrorCode::EmptyInput, "no verdicts to aggregate");
  VerdictAggregate agg;
  for (VerdictValue v : verdicts) {
    if (v == VerdictValue::Affirmative) agg.label = BinaryLabel::One;
    if (v == VerdictValue::Indeterminate) ++agg.indeterminate_count;
  }
  return agg;
}

VerdictAggregate aggregate_verdicts(std::span<const Verdict> verdicts) {
  std::vector<VerdictValue> values;
  values.reserve(verdicts.size());
  for (const auto& v : verdicts) values.push_back(v.value);
  return aggregate_verdicts(std::span<const VerdictValue>(values));
}

std::string_view aggregation_mode_name(AggregationMode m) {
  return m == AggregationMode::PerScenarioOr ? "per-scenario-or" : "union";
}

AggregationMode parse_aggregation_mode(std::string_view s) {
  if (s == "per-scenario-or") return AggregationMode::PerScenarioOr;
  if (s == "union") return AggregationMode::UnionThenClassify;
  throw Error(ErrorCode::InvalidConfig, "unknown aggregation mode '" + std::string(s) + "'");
}

BinaryLabel aggregate_feature_labels(std::span<const ScenarioOutcome> outcomes, AggregationMode mode) {
  if (outcomes.empty()) throw Error(ErrorCode::EmptyInput, "no scenario outcomes");
  FeatureSet all;
  BinaryLabel any = BinaryLabel::Zero;
  for (const auto& o : outcomes) {
    if (!o.features) {
      throw Error(ErrorCode::MissingFeatures, "scenario " + std::to_string(o.scenario.value()) + " has no features");
    }
    all |= *o.features;
    if (classify_features(*o.features) == BinaryLabel::One) any = BinaryLabel::One;
  }
  return mode == AggregationMode::PerScenarioOr ? any : classify_features(all);
}

}  // namespace sldx
