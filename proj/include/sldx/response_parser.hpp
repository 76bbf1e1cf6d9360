#pragma once

// Parsing of model completions: yes/no verdicts and multi-label feature lists.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sldx/corpus.hpp"

namespace sldx {

enum class VerdictValue { Affirmative, Negative, Indeterminate };

std::string_view verdict_name(VerdictValue v);  // "yes" / "no" / "indeterminate"

struct TextSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(const TextSpan&) const = default;
};

struct Verdict {
  VerdictValue value = VerdictValue::Indeterminate;
  std::optional<TextSpan> evidence;  // the deciding "yes"/"no" token
};

/// The first standalone "yes"/"no" word (any case) decides. In strict mode
/// any other word in the text makes the verdict Indeterminate.
Verdict parse_verdict(std::string_view text, bool strict = false);

struct FeatureParse {
  FeatureSet features;
  std::vector<std::string> warnings;
};

/// Recognizes codes F1..F10 and canonical feature names. A mention is dropped
/// when a negation cue appears earlier in the same sentence. Unknown codes
/// (F0, F11, ...) become warnings.
FeatureParse parse_features(std::string_view text);

/// Fixed negation cue list.
const std::vector<std::string>& negation_cues();

/// Sentence byte ranges: a sentence ends at '.', '!' or '?' followed by
/// whitespace or end of text. Whitespace between sentences is not included.
std::vector<TextSpan> sentence_spans(std::string_view text);
std::vector<std::string> sentence_split(std::string_view text);

}  // namespace sldx
