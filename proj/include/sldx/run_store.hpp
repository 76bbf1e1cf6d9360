#pragma once

// Run records: what a batch produced, persisted under
// <output_dir>/runs/<run_id>/ so later commands can evaluate and report on it.
//
//   config.snapshot   key=value lines of the effective configuration
//   record.json       RunRecord payload (deterministic for identical inputs)
//   results.csv       one line per session
//   execution.json    wall-clock timing and result sources (not deterministic)
//   reports/          evaluate / stats outputs

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sldx/classifier.hpp"
#include "sldx/llm_gateway.hpp"

namespace sldx {

inline constexpr std::string_view kToolVersion = "0.1.0";

enum class Task { Diagnose, Features };

std::string_view task_name(Task t);  // "diagnose" / "features"
Task parse_task(std::string_view s);

struct RunConfig {
  std::filesystem::path corpus_path;
  BackendConfig backend;
  std::string prompt_template_version{kPromptTemplateVersion};
  std::optional<std::vector<int>> included_scenarios;
  AggregationMode aggregation_mode = AggregationMode::PerScenarioOr;
  int parallelism = 1;
  std::filesystem::path output_dir = "sldx-out";
  bool strict_parse = false;
  Task task = Task::Diagnose;
  std::size_t max_prompt_chars = 0;  // 0 disables truncation

  /// Throws Error(InvalidConfig).
  void validate() const;
  /// Sorted key=value lines; the short config hash in run ids is taken over this.
  std::string snapshot() const;
};

struct RunCounters {
  std::size_t requests = 0;
  std::size_t failures = 0;
  std::size_t indeterminate = 0;
  std::size_t warnings = 0;
  std::size_t degenerate_skipped = 0;
  std::size_t truncated = 0;
};

struct RunRecord {
  std::string run_id;
  std::string tool_version{kToolVersion};
  std::string producer = "llm";  // "llm" or "lexical-oracle"
  Task task = Task::Diagnose;
  std::string backend;
  std::string model_id;
  std::string prompt_template_version{kPromptTemplateVersion};
  AggregationMode aggregation_mode = AggregationMode::PerScenarioOr;
  bool strict_parse = false;
  RunCounters counters;
  std::vector<SubjectOutcome> sessions;
};

std::string record_to_json(const RunRecord& r);
/// Throws Error(MalformedFile) / Error(SchemaViolation).
RunRecord record_from_json(std::string_view text);

std::string results_csv(const RunRecord& r);

std::filesystem::path run_dir(const std::filesystem::path& output_dir, const std::string& run_id);

/// Writes config.snapshot, record.json and results.csv (and execution.json
/// when given).
void write_run(const std::filesystem::path& output_dir, const RunRecord& r, const std::string& config_snapshot,
               const std::optional<std::string>& execution_json = std::nullopt);

/// Throws Error(RunNotFound).
RunRecord read_run(const std::filesystem::path& output_dir, const std::string& run_id);

/// Writes a file, creating parent directories. Throws Error(IoError).
void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace sldx
