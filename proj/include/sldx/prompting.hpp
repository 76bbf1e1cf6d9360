#pragma once

// Prompt construction for the two LLM tasks: a yes/no diagnosis question and a
// multi-label feature extraction question with a feature knowledge block.

#include <array>
#include <string>
#include <string_view>
#include <utility>

#include "sldx/corpus.hpp"
#include "sldx/digest.hpp"

namespace sldx {

/// Bumped whenever any fixed prompt string or layout changes.
inline constexpr std::string_view kPromptTemplateVersion = "sldx-prompts-v1";

inline constexpr std::string_view kDiagnosisQuestion =
    "Based on the above conversation between the examiner and the patient, please categorize "
    "if any observed SLDs for the patient. Answer only 'Yes' or 'No'.";

inline constexpr std::string_view kFeatureQuestion =
    "Based on the above conversation and the feature definitions below, list every feature "
    "(F1–F10) observed in the patient's speech. Answer with feature codes only, or 'None'.";

inline constexpr std::string_view kKnowledgeHeader = "Feature definitions:";

enum class PromptKind { Diagnosis, FeatureExtraction };

std::string_view prompt_kind_name(PromptKind kind);  // "diagnosis" / "features"

struct RenderedPrompt {
  PromptKind kind = PromptKind::Diagnosis;
  std::string text;
  Digest content_hash;  // sha256 over kind and text; model independent
  bool truncated = false;
};

/// Per-feature explanation text placed in the knowledge block, F1..F10.
struct Knowledge {
  std::array<std::string, kFeatureCount> explanations;
};

/// The explanations of the ten-feature taxonomy.
const Knowledge& default_knowledge();

/// "E: ..." / "P: ..." lines joined by '\n', no trailing newline.
/// Throws Error(UnknownRolePresent).
std::string render_dialogue(const ScenarioDialogue& d);

RenderedPrompt build_diagnosis_prompt(const ScenarioDialogue& d);

/// Throws Error(KnowledgeMissing) if any explanation is blank.
RenderedPrompt build_feature_prompt(const ScenarioDialogue& d,
                                    const Knowledge& knowledge = default_knowledge());

/// Renders the knowledge block alone (header plus one line per feature).
std::string render_knowledge(const Knowledge& knowledge);

/// Drops whole utterances from the tail until the rendering fits max_chars.
/// Throws Error(BudgetTooSmall) if even the first line does not fit.
std::pair<ScenarioDialogue, bool> truncate_dialogue(const ScenarioDialogue& d, std::size_t max_chars);

/// Catalog of every fixed string, for the prompt catalog document and run metadata.
std::string prompt_catalog();

}  // namespace sldx
