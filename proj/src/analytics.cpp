#include "sldx/analytics.hpp"

#include <cmath>
#include <cstdio>

#include "sldx/error.hpp"

namespace sldx {

ConfusionMatrix confusion(std::span<const BinaryLabel> pred, std::span<const BinaryLabel> truth) {
  if (pred.size() != truth.size()) {
    throw Error(ErrorCode::LengthMismatch,
                std::to_string(pred.size()) + " predictions vs " + std::to_string(truth.size()) + " labels");
  }
  if (pred.empty()) throw Error(ErrorCode::EmptyInput, "no predictions");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] == BinaryLabel::One;
    const bool t = truth[i] == BinaryLabel::One;
    if (p && t) ++cm.tp;
    if (p && !t) ++cm.fp;
    if (!p && t) ++cm.fn;
    if (!p && !t) ++cm.tn;
  }
  return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw Error(ErrorCode::EmptyInput, "empty confusion matrix");
  MetricsReport r;
  r.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
  if (cm.tp + cm.fp == 0) {
    r.degenerate_flags.insert("ppv_undefined");
  } else {
    r.ppv = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
  }
  if (cm.tp + cm.fn == 0) {
    r.degenerate_flags.insert("sensitivity_undefined");
  } else {
    r.sensitivity = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
  }
  if (r.ppv + r.sensitivity == 0.0) {
    r.degenerate_flags.insert("f1_undefined");
  } else {
    // Harmonic mean of PPV and sensitivity, in count form.
    r.f1 = static_cast<double>(2 * cm.tp) / static_cast<double>(2 * cm.tp + cm.fp + cm.fn);
  }
  return r;
}

// ---------------------------------------------------------------------------

CorrelationMatrix phi_matrix(const FeatureMatrix& m) {
  if (m.rows.size() < 2) throw Error(ErrorCode::TooFewRows, std::to_string(m.rows.size()) + " rows");
  const auto n = static_cast<double>(m.rows.size());

  // Sum-of-products form over integer co-occurrence counts.
  std::array<std::size_t, kFeatureCount> ones{};
  std::array<std::array<std::size_t, kFeatureCount>, kFeatureCount> both{};
  for (const FeatureSet& row : m.rows) {
    for (int i = 0; i < kFeatureCount; ++i) {
      if (!row.contains(kAllFeatures[i])) continue;
      ++ones[i];
      for (int j = i; j < kFeatureCount; ++j) {
        if (row.contains(kAllFeatures[j])) ++both[i][j];
      }
    }
  }

  CorrelationMatrix c;
  for (int i = 0; i < kFeatureCount; ++i) {
    const double ni = static_cast<double>(ones[i]);
    const double var_i = ni * (n - ni);
    if (var_i == 0.0) continue;
    c.r[i][i] = 1.0;
    for (int j = i + 1; j < kFeatureCount; ++j) {
      const double nj = static_cast<double>(ones[j]);
      const double var_j = nj * (n - nj);
      if (var_j == 0.0) continue;
      const double num = n * static_cast<double>(both[i][j]) - ni * nj;
      const double v = num / (std::sqrt(var_i) * std::sqrt(var_j));
      c.r[i][j] = v;
      c.r[j][i] = v;
    }
  }
  return c;
}

PrevalenceTable prevalence(const std::map<ScenarioId, std::vector<FeatureSet>>& per_scenario) {
  PrevalenceTable t;
  for (const auto& [sid, sets] : per_scenario) {
    if (!sid.included()) {
      throw Error(ErrorCode::ExcludedScenario, "scenario " + std::to_string(sid.value()) + " is not analysed");
    }
    PrevalenceRow row;
    row.scenario = sid;
    row.n_sessions = sets.size();
    for (const FeatureSet& fs : sets) {
      for (int k = 0; k < kFeatureCount; ++k) {
        if (fs.contains(kAllFeatures[k])) ++row.counts[k];
      }
    }
    for (int k = 0; k < kFeatureCount; ++k) {
      row.cells[k] = row.n_sessions == 0 ? 0.0
                                         : static_cast<double>(row.counts[k]) / static_cast<double>(row.n_sessions);
    }
    t.rows.push_back(row);
  }
  return t;
}

FeatureCounts feature_counts(std::span<const FeatureSet> sets) {
  FeatureCounts counts{};
  for (const FeatureSet& fs : sets) {
    for (int k = 0; k < kFeatureCount; ++k) {
      if (fs.contains(kAllFeatures[k])) ++counts[k];
    }
  }
  return counts;
}

// ---------------------------------------------------------------------------
// Rendering

std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s.rfind("-0.", 0) == 0 && std::stod(s) == 0.0) s.erase(0, 1);
  return s;
}

namespace {

std::string flags_joined(const std::set<std::string>& flags) {
  std::string out;
  for (const auto& f : flags) {
    if (!out.empty()) out += ";";
    out += f;
  }
  return out;
}

std::string header_codes(std::string_view sep) {
  std::string out;
  for (FeatureId f : kAllFeatures) {
    out += sep;
    out += feature_code(f);
  }
  return out;
}

std::string cell(const std::optional<double>& v, int decimals, std::string_view null_text) {
  return v ? format_fixed(*v, decimals) : std::string(null_text);
}

}  // namespace

std::string metrics_csv(const std::vector<std::pair<std::string, MetricsReport>>& rows) {
  std::string out = "path,Accuracy,PPV,Sensitivity,F1 Score,flags\n";
  for (const auto& [name, r] : rows) {
    out += name + "," + format_fixed(r.accuracy, 6) + "," + format_fixed(r.ppv, 6) + "," +
           format_fixed(r.sensitivity, 6) + "," + format_fixed(r.f1, 6) + "," + flags_joined(r.degenerate_flags) +
           "\n";
  }
  return out;
}

std::string metrics_markdown(const std::vector<std::pair<std::string, MetricsReport>>& rows) {
  std::string out = "| Path | Accuracy | PPV | Sensitivity | F1 Score |\n|---|---|---|---|---|\n";
  for (const auto& [name, r] : rows) {
    out += "| " + name + " | " + format_fixed(100 * r.accuracy, 2) + "% | " + format_fixed(100 * r.ppv, 2) + "% | " +
           format_fixed(100 * r.sensitivity, 2) + "% | " + format_fixed(100 * r.f1, 2) + "% |\n";
  }
  return out;
}

std::string phi_long_csv(const CorrelationMatrix& c) {
  std::string out = "i,j,phi\n";
  for (int i = 0; i < kFeatureCount; ++i) {
    for (int j = 0; j < kFeatureCount; ++j) {
      out += std::string(feature_code(kAllFeatures[i])) + "," + std::string(feature_code(kAllFeatures[j])) + "," +
             cell(c.r[i][j], 6, "") + "\n";
    }
  }
  return out;
}

std::string phi_wide_csv(const CorrelationMatrix& c) {
  std::string out = "feature" + header_codes(",") + "\n";
  for (int i = 0; i < kFeatureCount; ++i) {
    out += feature_code(kAllFeatures[i]);
    for (int j = 0; j < kFeatureCount; ++j) out += "," + cell(c.r[i][j], 6, "");
    out += "\n";
  }
  return out;
}

std::string phi_markdown(const CorrelationMatrix& c) {
  std::string out = "| ";
  for (FeatureId f : kAllFeatures) out += "| " + std::string(feature_code(f)) + " ";
  out += "|\n|---";
  for (int k = 0; k < kFeatureCount; ++k) out += "|---";
  out += "|\n";
  for (int i = 0; i < kFeatureCount; ++i) {
    out += "| " + std::string(feature_code(kAllFeatures[i])) + " ";
    for (int j = 0; j < kFeatureCount; ++j) out += "| " + cell(c.r[i][j], 3, "-") + " ";
    out += "|\n";
  }
  return out;
}

std::string prevalence_csv_row(const PrevalenceRow& row) {
  std::string out = std::to_string(row.scenario.value());
  for (double v : row.cells) out += "," + format_fixed(v, 2);
  return out;
}

std::string prevalence_csv(const PrevalenceTable& t) {
  std::string out = "scenario" + header_codes(",") + "\n";
  for (const auto& row : t.rows) out += prevalence_csv_row(row) + "\n";
  return out;
}

std::string prevalence_markdown(const PrevalenceTable& t) {
  std::string out = "| Scenario ";
  for (FeatureId f : kAllFeatures) out += "| " + std::string(feature_code(f)) + " ";
  out += "| n |\n|---";
  for (int k = 0; k <= kFeatureCount; ++k) out += "|---";
  out += "|\n";
  for (const auto& row : t.rows) {
    out += "| " + std::to_string(row.scenario.value()) + " ";
    for (double v : row.cells) out += "| " + format_fixed(v, 2) + " ";
    out += "| " + std::to_string(row.n_sessions) + " |\n";
  }
  return out;
}

std::string counts_csv(const std::vector<std::pair<std::string, FeatureCounts>>& columns) {
  std::string out = "feature";
  for (const auto& [name, _] : columns) out += "," + name;
  out += "\n";
  for (int k = 0; k < kFeatureCount; ++k) {
    out += feature_code(kAllFeatures[k]);
    for (const auto& [_, counts] : columns) out += "," + std::to_string(counts[k]);
    out += "\n";
  }
  return out;
}

std::string counts_markdown(const std::vector<std::pair<std::string, FeatureCounts>>& columns) {
  std::string out = "| Feature ";
  for (const auto& [name, _] : columns) out += "| " + name + " ";
  out += "|\n|---";
  for (std::size_t k = 0; k < columns.size(); ++k) out += "|---";
  out += "|\n";
  for (int k = 0; k < kFeatureCount; ++k) {
    out += "| " + std::string(feature_code(kAllFeatures[k])) + " " + std::string(feature_name(kAllFeatures[k])) + " ";
    for (const auto& [_, counts] : columns) out += "| " + std::to_string(counts[k]) + " ";
    out += "|\n";
  }
  return out;
}

}  // namespace sldx
