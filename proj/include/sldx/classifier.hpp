#pragma once

// Rule-based A4 classification and subject-level aggregation.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sldx/corpus.hpp"
#include "sldx/response_parser.hpp"

namespace sldx {

/// Critical features; either one alone yields label 1.
FeatureSet critical_features();      // {F1, F9}
FeatureSet non_critical_features();  // the other eight

/// More than this many distinct non-critical features yields label 1.
inline constexpr int kCumulativeThreshold = 2;

/// 1 iff F1 or F9 is present, or more than two of the remaining eight are.
BinaryLabel classify_features(const FeatureSet& fs);

/// Independent re-derivation of classify_features by explicit enumeration;
/// used as a test oracle.
BinaryLabel brute_force_oracle(const FeatureSet& fs);

struct VerdictAggregate {
  BinaryLabel label = BinaryLabel::Zero;
  std::size_t indeterminate_count = 0;
};

/// 1 iff any verdict is Affirmative; Indeterminate counts as Negative and is
/// tallied. Throws Error(EmptyInput).
VerdictAggregate aggregate_verdicts(std::span<const Verdict> verdicts);
VerdictAggregate aggregate_verdicts(std::span<const VerdictValue> verdicts);

enum class AggregationMode { PerScenarioOr, UnionThenClassify };

std::string_view aggregation_mode_name(AggregationMode m);  // "per-scenario-or" / "union"
AggregationMode parse_aggregation_mode(std::string_view s);

struct ScenarioOutcome {
  ScenarioId scenario{3};
  std::optional<Verdict> verdict;
  std::optional<FeatureSet> features;
  std::optional<BinaryLabel> label;
  std::vector<std::string> warnings;
  std::optional<std::string> error;  // request failure or skip reason
};

struct SubjectOutcome {
  std::string subject_id;
  std::string session_id;
  std::vector<ScenarioOutcome> scenario_outcomes;
  std::optional<BinaryLabel> predicted_label;  // absent when nothing was analyzable
  std::optional<BinaryLabel> true_label;
  std::size_t indeterminate_count = 0;
};

/// Per-scenario rule labels OR-ed together (default), or the rule applied to
/// the union of all scenario feature sets. Throws Error(MissingFeatures) if an
/// outcome lacks features, Error(EmptyInput) on an empty list.
BinaryLabel aggregate_feature_labels(std::span<const ScenarioOutcome> outcomes,
                                     AggregationMode mode = AggregationMode::PerScenarioOr);

}  // namespace sldx
