#pragma once

// Evaluation metrics, binary-feature correlation, per-scenario prevalence and
// feature counts, plus their CSV / Markdown renderings.

#include <array>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "sldx/corpus.hpp"

namespace sldx {

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

struct MetricsReport {
  double accuracy = 0;
  double ppv = 0;
  double sensitivity = 0;
  double f1 = 0;
  std::set<std::string> degenerate_flags;  // "ppv_undefined", "sensitivity_undefined", "f1_undefined"
};

/// Throws Error(LengthMismatch) / Error(EmptyInput).
ConfusionMatrix confusion(std::span<const BinaryLabel> pred, std::span<const BinaryLabel> truth);

/// Undefined ratios are reported as 0 and flagged. Throws Error(EmptyInput)
/// when the matrix is all zeros.
MetricsReport metrics(const ConfusionMatrix& cm);

// ---------------------------------------------------------------------------

/// Rows of 0/1 cells, columns F1..F10.
struct FeatureMatrix {
  std::vector<std::string> row_labels;
  std::vector<FeatureSet> rows;
};

/// Entry (i, j) is the Pearson (phi) correlation of columns i and j; empty
/// when either column is constant.
struct CorrelationMatrix {
  std::array<std::array<std::optional<double>, kFeatureCount>, kFeatureCount> r{};
};

/// Throws Error(TooFewRows) with fewer than two rows.
CorrelationMatrix phi_matrix(const FeatureMatrix& m);

struct PrevalenceRow {
  ScenarioId scenario{3};
  std::size_t n_sessions = 0;
  std::array<std::size_t, kFeatureCount> counts{};
  std::array<double, kFeatureCount> cells{};  // counts / n_sessions
};

struct PrevalenceTable {
  std::vector<PrevalenceRow> rows;  // ascending scenario id
};

/// Throws Error(ExcludedScenario) for scenarios outside the analysis set.
PrevalenceTable prevalence(const std::map<ScenarioId, std::vector<FeatureSet>>& per_scenario);

using FeatureCounts = std::array<std::size_t, kFeatureCount>;

FeatureCounts feature_counts(std::span<const FeatureSet> sets);

// ---------------------------------------------------------------------------
// Rendering. Numbers use fixed notation; structured (CSV) output is the
// contract, Markdown mirrors it for reading.

/// "0.45" style two-decimal rendering.
std::string format_fixed(double v, int decimals);

std::string metrics_csv(const std::vector<std::pair<std::string, MetricsReport>>& rows);
std::string metrics_markdown(const std::vector<std::pair<std::string, MetricsReport>>& rows);

std::string phi_long_csv(const CorrelationMatrix& c);
std::string phi_wide_csv(const CorrelationMatrix& c);
std::string phi_markdown(const CorrelationMatrix& c);

std::string prevalence_csv(const PrevalenceTable& t);
std::string prevalence_markdown(const PrevalenceTable& t);
/// "3,0.45,0.64,..." for a single scenario row.
std::string prevalence_csv_row(const PrevalenceRow& row);

std::string counts_csv(const std::vector<std::pair<std::string, FeatureCounts>>& columns);
std::string counts_markdown(const std::vector<std::pair<std::string, FeatureCounts>>& columns);

}  // namespace sldx
