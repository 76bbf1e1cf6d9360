#include "sldx/prompting.hpp"

#include "sldx/error.hpp"
#include "sldx/text.hpp"

namespace sldx {

std::string_view prompt_kind_name(PromptKind kind) {
  return kind == PromptKind::Diagnosis ? "diagnosis" : "features";
}

const Knowledge& default_knowledge() {
  static const Knowledge k{{
      "The individual mimics verbatim what has been said by others, including the examiner, or "
      "recites phrases from external sources like advertisements or movie scripts, showing a "
      "delayed echo response.",
      "The speech contains peculiarly chosen content or contextually odd phrasing, such as using "
      "'unfreshness through household' for lack of novelty, 'mideast' instead of 'midwest' for "
      "U.S. states, or describing entry into a building as 'through various apertures'.",
      "Incorrectly substitutes personal pronouns, using 'you' in place of 'I', or refers to "
      "themselves in the third person, either by pronouns like 'he/she' or by their own name.",
      "Incorporates humorous or comedic expressions inappropriately during discussions meant to "
      "be serious, showing a misalignment between the content's emotional tone and the context.",
      "Employs an overly formal or archaic language style that seems lifted from written texts, "
      "legal documents, or old literature, rather than engaging in conversational speech. "
      "Examples include elaborate ways of expressing simple ideas or feelings.",
      "Attaches redundant phrases or filler expressions to their speech without contributing any "
      "substantive meaning or context, such as 'you know what I mean' or 'as they say,' "
      "indicating a habit rather than intentional emphasis.",
      "Utilizes conventional social expressions excessively or inappropriately, responding with "
      "phrases like 'oh, thank you' in contexts where it does not fit or preempting social "
      "gestures not yet performed by the interlocutor.",
      "Reiterates social phrases with an unchanged, monotonous intonation, indicating a lack of "
      "genuine emotional engagement or variability in social interactions.",
      "Quotes lines from commercials, movies, or TV shows in a highly stereotypical manner, "
      "employing a canned intonation that mimics the original source closely, suggesting a "
      "reliance on external media for verbal expressions.",
      "Resorts to well-known sayings or clichés in lieu of engaging in direct conversational "
      "responses, using phrases like 'circle of life' or 'ready to roll' as stand-ins for more "
      "personalized communication.",
  }};
  return k;
}

namespace {

std::string render_line(const Utterance& u) {
  switch (u.role) {
    case SpeakerRole::Examiner: return "E: " + u.text;
    case SpeakerRole::Patient: return "P: " + u.text;
    case SpeakerRole::Unknown: break;
  }
  throw Error(ErrorCode::UnknownRolePresent, "utterance " + std::to_string(u.index));
}

RenderedPrompt finish(PromptKind kind, std::string text) {
  RenderedPrompt p;
  p.kind = kind;
  p.content_hash = sha256(std::string(prompt_kind_name(kind)) + "\n" + text);
  p.text = std::move(text);
  return p;
}

}  // namespace

std::string render_dialogue(const ScenarioDialogue& d) {
  std::string out;
  for (std::size_t i = 0; i < d.utterances.size(); ++i) {
    if (i) out.push_back('\n');
    out += render_line(d.utterances[i]);
  }
  return out;
}

RenderedPrompt build_diagnosis_prompt(const ScenarioDialogue& d) {
  std::string text = render_dialogue(d);
  text += "\n\n";
  text += kDiagnosisQuestion;
  return finish(PromptKind::Diagnosis, std::move(text));
}

std::string render_knowledge(const Knowledge& knowledge) {
  std::string out(kKnowledgeHeader);
  for (FeatureId f : kAllFeatures) {
    const std::string& expl = knowledge.explanations[feature_index(f)];
    if (text::collapse_whitespace(expl).empty()) {
      throw Error(ErrorCode::KnowledgeMissing, "no explanation for " + std::string(feature_code(f)));
    }
    out += "\n";
    out += feature_code(f);
    out += " — ";
    out += feature_name(f);
    out += ": ";
    out += expl;
  }
  return out;
}

RenderedPrompt build_feature_prompt(const ScenarioDialogue& d, const Knowledge& knowledge) {
  const std::string k_block = render_knowledge(knowledge);
  std::string text = render_dialogue(d);
  text += "\n\n";
  text += kFeatureQuestion;
  text += "\n\n";
  text += k_block;
  return finish(PromptKind::FeatureExtraction, std::move(text));
}

std::pair<ScenarioDialogue, bool> truncate_dialogue(const ScenarioDialogue& d, std::size_t max_chars) {
  ScenarioDialogue out{d.scenario, {}};
  std::size_t length = 0;
  for (const auto& u : d.utterances) {
    const std::size_t line = render_line(u).size();
    const std::size_t next = out.utterances.empty() ? line : length + 1 + line;
    if (next > max_chars) {
      if (out.utterances.empty()) {
        throw Error(ErrorCode::BudgetTooSmall,
                    "first line needs " + std::to_string(line) + " chars, budget " + std::to_string(max_chars));
      }
      return {std::move(out), true};
    }
    length = next;
    out.utterances.push_back(u);
  }
  return {std::move(out), false};
}

std::string prompt_catalog() {
  std::string out = "# Prompt catalog (" + std::string(kPromptTemplateVersion) + ")\n\n";
  out += "## Diagnosis prompt\n\n<dialogue>\n\n" + std::string(kDiagnosisQuestion) + "\n\n";
  out += "## Feature extraction prompt\n\n<dialogue>\n\n" + std::string(kFeatureQuestion) + "\n\n";
  out += render_knowledge(default_knowledge()) + "\n";
  return out;
}

}  // namespace sldx
