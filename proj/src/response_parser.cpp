#include "sldx/response_parser.hpp"

#include <algorithm>
#include <cctype>

#include "sldx/text.hpp"

namespace sldx {

std::string_view verdict_name(VerdictValue v) {
  switch (v) {
    case VerdictValue::Affirmative: return "yes";
    case VerdictValue::Negative: return "no";
    case VerdictValue::Indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

Verdict parse_verdict(std::string_view text, bool strict) {
  const auto tokens = text::tokenize(text);
  for (const auto& t : tokens) {
    if (t.norm != "yes" && t.norm != "no") continue;
    if (strict && tokens.size() != 1) return {};
    return {t.norm == "yes" ? VerdictValue::Affirmative : VerdictValue::Negative, TextSpan{t.begin, t.end}};
  }
  return {};
}

// ---------------------------------------------------------------------------

std::vector<TextSpan> sentence_spans(std::string_view text) {
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  std::vector<TextSpan> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && is_space(text[i])) ++i;
    if (i >= n) break;
    const std::size_t begin = i;
    std::size_t end = n;
    for (std::size_t k = i; k < n; ++k) {
      const char c = text[k];
      if ((c == '.' || c == '!' || c == '?') && (k + 1 == n || is_space(text[k + 1]))) {
        end = k + 1;
        break;
      }
    }
    // Trailing whitespace of an unterminated final sentence is a separator.
    std::size_t trimmed = end;
    while (trimmed > begin && is_space(text[trimmed - 1])) --trimmed;
    out.push_back({begin, trimmed});
    i = end;
  }
  return out;
}

std::vector<std::string> sentence_split(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& s : sentence_spans(text)) out.emplace_back(text.substr(s.begin, s.end - s.begin));
  return out;
}

namespace {

struct Pattern {
  FeatureId feature;
  std::vector<std::string> tokens;
};

const std::vector<Pattern>& name_patterns() {
  static const std::vector<Pattern> patterns = [] {
    std::vector<Pattern> v;
    for (FeatureId f : kAllFeatures) v.push_back({f, text::words(feature_name(f))});
    // ASCII spelling models sometimes emit for the F10 name.
    v.push_back({FeatureId::F10, {"cliched", "verbal", "substitutions"}});
    return v;
  }();
  return patterns;
}

bool matches_at(const std::vector<text::Token>& toks, std::size_t i, const std::vector<std::string>& pat) {
  if (i + pat.size() > toks.size()) return false;
  for (std::size_t k = 0; k < pat.size(); ++k) {
    if (toks[i + k].norm != pat[k]) return false;
  }
  return true;
}

// "f7" -> 7; -1 when the token is not an F-code.
int code_number(const std::string& tok) {
  if (tok.size() < 2 || tok[0] != 'f') return -1;
  if (tok.size() > 4) return -1;
  int n = 0;
  for (std::size_t k = 1; k < tok.size(); ++k) {
    if (!std::isdigit(static_cast<unsigned char>(tok[k]))) return -1;
    n = n * 10 + (tok[k] - '0');
  }
  return n;
}

void add_warning(std::vector<std::string>& warnings, std::string w) {
  if (std::find(warnings.begin(), warnings.end(), w) == warnings.end()) warnings.push_back(std::move(w));
}

}  // namespace

const std::vector<std::string>& negation_cues() {
  static const std::vector<std::string> cues = {"no", "not", "none", "absent", "no evidence of", "does not"};
  return cues;
}

FeatureParse parse_features(std::string_view text) {
  static const std::vector<std::vector<std::string>> cue_tokens = [] {
    std::vector<std::vector<std::string>> v;
    for (const auto& c : negation_cues()) v.push_back(text::words(c));
    return v;
  }();

  FeatureParse out;
  for (const auto& span : sentence_spans(text)) {
    const auto toks = text::tokenize(text.substr(span.begin, span.end - span.begin));

    std::size_t first_cue = toks.size();
    for (std::size_t i = 0; i < toks.size() && first_cue == toks.size(); ++i) {
      for (const auto& cue : cue_tokens) {
        if (matches_at(toks, i, cue)) {
          first_cue = i;
          break;
        }
      }
    }

    auto mention = [&](FeatureId f, std::size_t at) {
      if (first_cue < at) {
        add_warning(out.warnings, "negated mention: " + std::string(feature_code(f)));
      } else {
        out.features.insert(f);
      }
    };

    for (std::size_t i = 0; i < toks.size(); ++i) {
      const int code = code_number(toks[i].norm);
      if (code >= 1 && code <= kFeatureCount) {
        mention(kAllFeatures[code - 1], i);
      } else if (code >= 0) {
        add_warning(out.warnings, "unknown feature code: F" + std::to_string(code));
      }
      for (const auto& p : name_patterns()) {
        if (matches_at(toks, i, p.tokens)) mention(p.feature, i);
      }
    }
  }
  return out;
}

}  // namespace sldx
