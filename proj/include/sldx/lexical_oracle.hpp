#pragma once

// Deterministic lexical detectors for the mechanically checkable features
// (F1 echo, F3 pronoun displacement, F6 filler phrases, F10 cliches) and a
// seeded synthetic-dialogue generator that injects them.
//
// These are test oracles for the pipeline, not clinical instruments.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sldx/corpus.hpp"

namespace sldx {

struct EchoParams {
  int min_span_tokens = 3;
  bool allow_pronoun_flip = true;
  int lookback_utterances = 1;

  /// Throws Error(InvalidConfig).
  void validate() const;
};

/// Named phrase list. Phrases are stored lowercased and whitespace-normalized
/// and are matched as whole-word token sequences; a "..." token in a phrase
/// matches any gap within the same utterance.
struct Lexicon {
  std::string name;
  std::vector<std::string> phrases;

  /// Normalizes and validates (Error(InvalidConfig) if empty).
  static Lexicon from_phrases(std::string name, const std::vector<std::string>& raw);
};

/// One phrase per line; '#' starts a comment; blank lines ignored.
Lexicon parse_lexicon(std::string name, std::string_view content);
Lexicon load_lexicon(const std::filesystem::path& path, std::string name);

struct PronounRules {
  /// When set, "<name> <verb>" in patient speech counts as third-person
  /// self-reference.
  std::optional<std::string> subject_name;
  std::vector<std::string> self_reference_verbs;
  Lexicon templates;
};

struct OracleConfig {
  EchoParams echo;
  Lexicon filler;  // F6
  int filler_min_hits = 2;
  Lexicon cliches;  // F10
  int cliche_min_hits = 1;
  PronounRules pronoun;
};

/// Built-in lexicons (identical to the shipped lexicons/ files).
const OracleConfig& default_oracle_config();

/// Reads filler.txt, cliches.txt, pronoun_templates.txt and
/// self_reference_verbs.txt from `dir`.
OracleConfig load_oracle_config(const std::filesystem::path& dir);

/// The features this module can emit: {F1, F3, F6, F10}.
FeatureSet detectable_features();

/// Some patient utterance shares a run of >= min_span_tokens normalized tokens
/// with one of the preceding `lookback_utterances` examiner utterances,
/// optionally after flipping first/second person in the examiner text.
bool detect_echo(const ScenarioDialogue& d, const EchoParams& p = {});

/// Total phrase occurrences across patient utterances.
int count_lexicon_hits(const ScenarioDialogue& d, const Lexicon& lex);
bool detect_lexicon(const ScenarioDialogue& d, const Lexicon& lex, int min_hits);

bool detect_pronoun_displacement(const ScenarioDialogue& d, const PronounRules& rules);
bool detect_pronoun_displacement(const ScenarioDialogue& d);

FeatureSet detect_all(const ScenarioDialogue& d, const OracleConfig& config = default_oracle_config());

/// Applies you<->i, your<->my, yours<->mine, are<->am to normalized tokens.
std::vector<std::string> flip_pronouns(const std::vector<std::string>& tokens);

// ---------------------------------------------------------------------------
// Synthetic dialogues

struct SynthSpec {
  std::uint64_t seed = 0;
  FeatureSet injected;  // subset of detectable_features()
  int turns = 6;        // examiner/patient exchanges, >= 4
  std::optional<ScenarioId> scenario;
};

struct SyntheticDialogue {
  ScenarioDialogue dialogue;
  FeatureSet ground_truth;
};

/// Deterministic in the seed. Throws Error(UndetectableFeatureRequested) or
/// Error(InvalidConfig) for turns < 4.
SyntheticDialogue generate_synthetic(const SynthSpec& spec);

/// Template pools, exposed so tests can check them for accidental overlaps.
const std::vector<std::string>& synth_examiner_pool();
const std::vector<std::string>& synth_patient_pool();

}  // namespace sldx
