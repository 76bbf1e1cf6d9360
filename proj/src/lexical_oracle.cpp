#include "sldx/lexical_oracle.hpp"

#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "sldx/error.hpp"
#include "sldx/text.hpp"

namespace sldx {

void EchoParams::validate() const {
  if (min_span_tokens < 2) throw Error(ErrorCode::InvalidConfig, "min_span_tokens must be >= 2");
  if (lookback_utterances < 1) throw Error(ErrorCode::InvalidConfig, "lookback_utterances must be >= 1");
}

// ---------------------------------------------------------------------------
// Lexicons

namespace {

constexpr std::string_view kGap = "...";

// "Well,  pretty much" -> "well pretty much"; "me ... her" keeps the gap marker.
std::string normalize_phrase(std::string_view raw) {
  std::vector<std::string> pieces;
  std::size_t pos = 0;
  while (true) {
    const std::size_t gap = raw.find(kGap, pos);
    const std::string piece = text::join(text::words(raw.substr(pos, gap == std::string_view::npos ? raw.npos : gap - pos)), " ");
    if (!piece.empty()) pieces.push_back(piece);
    if (gap == std::string_view::npos) break;
    pos = gap + kGap.size();
  }
  return text::join(pieces, " ... ");
}

// Phrase split into gap-separated token runs.
std::vector<std::vector<std::string>> phrase_pieces(const std::string& phrase) {
  std::vector<std::vector<std::string>> out(1);
  for (auto& w : [&] {
         std::vector<std::string> v;
         std::istringstream ss(phrase);
         for (std::string t; ss >> t;) v.push_back(t);
         return v;
       }()) {
    if (w == kGap) {
      out.emplace_back();
    } else {
      out.back().push_back(std::move(w));
    }
  }
  return out;
}

bool run_at(const std::vector<std::string>& toks, std::size_t i, const std::vector<std::string>& run) {
  if (i + run.size() > toks.size()) return false;
  for (std::size_t k = 0; k < run.size(); ++k) {
    if (toks[i + k] != run[k]) return false;
  }
  return true;
}

// Number of start positions at which the phrase matches.
int count_phrase(const std::vector<std::string>& toks, const std::vector<std::vector<std::string>>& pieces) {
  if (pieces.empty() || pieces.front().empty()) return 0;
  int hits = 0;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (!run_at(toks, i, pieces.front())) continue;
    std::size_t cursor = i + pieces.front().size();
    bool ok = true;
    for (std::size_t p = 1; p < pieces.size() && ok; ++p) {
      bool found = false;
      for (std::size_t j = cursor; j < toks.size(); ++j) {
        if (run_at(toks, j, pieces[p])) {
          cursor = j + pieces[p].size();
          found = true;
          break;
        }
      }
      ok = found;
    }
    if (ok) ++hits;
  }
  return hits;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lexicon_lines(std::string_view content) {
  std::vector<std::string> out;
  std::istringstream ss{std::string(content)};
  for (std::string line; std::getline(ss, line);) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = text::collapse_whitespace(line);
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

}  // namespace

Lexicon Lexicon::from_phrases(std::string name, const std::vector<std::string>& raw) {
  Lexicon lex{std::move(name), {}};
  std::set<std::string> seen;
  for (const auto& r : raw) {
    std::string p = normalize_phrase(r);
    if (!p.empty() && seen.insert(p).second) lex.phrases.push_back(std::move(p));
  }
  if (lex.phrases.empty()) throw Error(ErrorCode::InvalidConfig, "lexicon '" + lex.name + "' is empty");
  return lex;
}

Lexicon parse_lexicon(std::string name, std::string_view content) {
  return Lexicon::from_phrases(std::move(name), lexicon_lines(content));
}

Lexicon load_lexicon(const std::filesystem::path& path, std::string name) {
  return parse_lexicon(std::move(name), read_text(path));
}

const OracleConfig& default_oracle_config() {
  static const OracleConfig config = [] {
    OracleConfig c;
    c.filler = Lexicon::from_phrases("filler", {"you know what I mean", "as they say", "whatever"});
    c.cliches = Lexicon::from_phrases("cliches", {"circle of life", "ready to roll", "well, pretty much"});
    c.pronoun.templates = Lexicon::from_phrases(
        "pronoun_templates",
        {"live near her", "live near him", "me want", "me wants", "me like", "me likes", "me is", "me has"});
    c.pronoun.self_reference_verbs = {"is", "was", "has", "wants", "likes", "goes", "thinks",
                                      "lives", "feels", "said", "does", "gets"};
    return c;
  }();
  return config;
}

OracleConfig load_oracle_config(const std::filesystem::path& dir) {
  OracleConfig c = default_oracle_config();
  c.filler = load_lexicon(dir / "filler.txt", "filler");
  c.cliches = load_lexicon(dir / "cliches.txt", "cliches");
  c.pronoun.templates = load_lexicon(dir / "pronoun_templates.txt", "pronoun_templates");
  c.pronoun.self_reference_verbs = load_lexicon(dir / "self_reference_verbs.txt", "self_reference_verbs").phrases;
  return c;
}

FeatureSet detectable_features() { return {FeatureId::F1, FeatureId::F3, FeatureId::F6, FeatureId::F10}; }

// ---------------------------------------------------------------------------
// Detectors

std::vector<std::string> flip_pronouns(const std::vector<std::string>& tokens) {
  static const std::vector<std::pair<std::string, std::string>> kPairs = {
      {"you", "i"}, {"your", "my"}, {"yours", "mine"}, {"are", "am"}};
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    std::string flipped = t;
    for (const auto& [a, b] : kPairs) {
      if (t == a) flipped = b;
      if (t == b) flipped = a;
    }
    out.push_back(std::move(flipped));
  }
  return out;
}

namespace {

void add_ngrams(const std::vector<std::string>& toks, std::size_t n, std::set<std::string>& out) {
  if (toks.size() < n) return;
  for (std::size_t i = 0; i + n <= toks.size(); ++i) {
    std::vector<std::string> slice(toks.begin() + static_cast<std::ptrdiff_t>(i),
                                   toks.begin() + static_cast<std::ptrdiff_t>(i + n));
    out.insert(text::join(slice, " "));
  }
}

}  // namespace

bool detect_echo(const ScenarioDialogue& d, const EchoParams& p) {
  p.validate();
  const auto n = static_cast<std::size_t>(p.min_span_tokens);
  std::vector<std::vector<std::string>> examiner_history;
  for (const auto& u : d.utterances) {
    if (u.role == SpeakerRole::Examiner) {
      examiner_history.push_back(text::words(u.text));
      continue;
    }
    if (u.role != SpeakerRole::Patient || examiner_history.empty()) continue;

    std::set<std::string> grams;
    const std::size_t from = examiner_history.size() > static_cast<std::size_t>(p.lookback_utterances)
                                 ? examiner_history.size() - static_cast<std::size_t>(p.lookback_utterances)
                                 : 0;
    for (std::size_t k = from; k < examiner_history.size(); ++k) {
      add_ngrams(examiner_history[k], n, grams);
      if (p.allow_pronoun_flip) add_ngrams(flip_pronouns(examiner_history[k]), n, grams);
    }
    std::set<std::string> patient_grams;
    add_ngrams(text::words(u.text), n, patient_grams);
    for (const auto& g : patient_grams) {
      if (grams.contains(g)) return true;
    }
  }
  return false;
}

int count_lexicon_hits(const ScenarioDialogue& d, const Lexicon& lex) {
  std::vector<std::vector<std::vector<std::string>>> patterns;
  for (const auto& phrase : lex.phrases) patterns.push_back(phrase_pieces(phrase));
  int hits = 0;
  for (const auto& u : d.utterances) {
    if (u.role != SpeakerRole::Patient) continue;
    const auto toks = text::words(u.text);
    for (const auto& pat : patterns) hits += count_phrase(toks, pat);
  }
  return hits;
}

bool detect_lexicon(const ScenarioDialogue& d, const Lexicon& lex, int min_hits) {
  if (min_hits < 1) throw Error(ErrorCode::InvalidConfig, "min_hits must be >= 1");
  return count_lexicon_hits(d, lex) >= min_hits;
}

bool detect_pronoun_displacement(const ScenarioDialogue& d, const PronounRules& rules) {
  if (count_lexicon_hits(d, rules.templates) > 0) return true;
  if (!rules.subject_name) return false;
  const auto name = text::words(*rules.subject_name);
  if (name.empty()) return false;
  for (const auto& u : d.utterances) {
    if (u.role != SpeakerRole::Patient) continue;
    const auto toks = text::words(u.text);
    for (std::size_t i = 0; i + name.size() < toks.size(); ++i) {
      if (!run_at(toks, i, name)) continue;
      const auto& next = toks[i + name.size()];
      for (const auto& verb : rules.self_reference_verbs) {
        if (next == verb) return true;
      }
    }
  }
  return false;
}

bool detect_pronoun_displacement(const ScenarioDialogue& d) {
  return detect_pronoun_displacement(d, default_oracle_config().pronoun);
}

FeatureSet detect_all(const ScenarioDialogue& d, const OracleConfig& config) {
  FeatureSet out;
  if (detect_echo(d, config.echo)) out.insert(FeatureId::F1);
  if (detect_pronoun_displacement(d, config.pronoun)) out.insert(FeatureId::F3);
  if (detect_lexicon(d, config.filler, config.filler_min_hits)) out.insert(FeatureId::F6);
  if (detect_lexicon(d, config.cliches, config.cliche_min_hits)) out.insert(FeatureId::F10);
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic dialogues

const std::vector<std::string>& synth_examiner_pool() {
  static const std::vector<std::string> pool = {
      "How was your week so far?",
      "What did you have for breakfast today?",
      "Can you tell me about your favorite hobby?",
      "Where did you grow up?",
      "What kind of music do you enjoy?",
      "How do you usually spend the weekend?",
      "Tell me about a recent trip you took.",
      "What do you think about the weather lately?",
      "Do you have any pets at home?",
      "What would you like to learn next year?",
  };
  return pool;
}

const std::vector<std::string>& synth_patient_pool() {
  static const std::vector<std::string> pool = {
      "It was fine, mostly quiet.",
      "I had toast and some coffee.",
      "I enjoy painting small landscapes.",
      "A small town by the coast.",
      "Mostly jazz and some classical pieces.",
      "Reading books and walking the dog.",
      "We drove to the mountains in spring.",
      "It has been rainy and cold.",
      "We have two cats.",
      "Maybe cooking or a new language.",
      "Sure.",
      "That sounds good to me.",
  };
  return pool;
}

namespace {

const std::vector<std::string> kFillerInserts = {"you know what I mean", "as they say", "whatever"};
const std::vector<std::string> kClicheInserts = {"It is the circle of life.", "Ready to roll.", "Well, pretty much."};
const std::vector<std::string> kPronounInserts = {"They kind of live near her farther from here.",
                                                  "My cousins live near him now."};

class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }

 private:
  std::mt19937_64 rng_;
};

std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

struct PatientTurn {
  std::vector<std::string> before;  // sentences placed ahead of the neutral answer
  std::string answer;
  std::vector<std::string> after;
};

}  // namespace

SyntheticDialogue generate_synthetic(const SynthSpec& spec) {
  if (!spec.injected.is_subset_of(detectable_features())) {
    throw Error(ErrorCode::UndetectableFeatureRequested,
                (spec.injected & FeatureSet::from_mask(static_cast<std::uint16_t>(~detectable_features().mask())))
                    .to_string());
  }
  if (spec.turns < 4) throw Error(ErrorCode::InvalidConfig, "synthetic dialogues need at least 4 turns");

  Draw draw(spec.seed);
  const auto& inc = included_scenarios();
  const ScenarioId scenario = spec.scenario ? *spec.scenario : inc[draw.below(inc.size())];
  const auto turns = static_cast<std::size_t>(spec.turns);

  std::vector<std::string> questions;
  std::vector<PatientTurn> replies(turns);
  for (std::size_t t = 0; t < turns; ++t) {
    questions.push_back(synth_examiner_pool()[draw.below(synth_examiner_pool().size())]);
    replies[t].answer = synth_patient_pool()[draw.below(synth_patient_pool().size())];
  }

  if (spec.injected.contains(FeatureId::F1)) {
    const std::size_t t = draw.below(turns);
    std::string q = questions[t];
    while (!q.empty() && (q.back() == '?' || q.back() == '.')) q.pop_back();
    const std::string echoed = text::join(flip_pronouns(text::words(q)), " ");
    replies[t].before.insert(replies[t].before.begin(), "Uh, " + echoed + "?");
  }
  if (spec.injected.contains(FeatureId::F3)) {
    const std::size_t t = draw.below(turns);
    replies[t].after.push_back(kPronounInserts[draw.below(kPronounInserts.size())]);
  }
  if (spec.injected.contains(FeatureId::F6)) {
    // Two filler occurrences, possibly in the same reply.
    for (int k = 0; k < 2; ++k) {
      const std::size_t t = draw.below(turns);
      const std::string& phrase = kFillerInserts[draw.below(kFillerInserts.size())];
      if (draw.below(2) == 0) {
        replies[t].before.push_back(capitalize(phrase) + ".");
      } else {
        replies[t].after.push_back(capitalize(phrase) + ".");
      }
    }
  }
  if (spec.injected.contains(FeatureId::F10)) {
    const std::size_t t = draw.below(turns);
    replies[t].before.push_back(kClicheInserts[draw.below(kClicheInserts.size())]);
  }

  SyntheticDialogue out{ScenarioDialogue{scenario, {}}, spec.injected};
  std::int64_t clock = 0;
  auto push = [&](SpeakerRole role, std::string text) {
    const std::int64_t dur = 1000 + static_cast<std::int64_t>(text.size()) * 60;
    out.dialogue.utterances.push_back({role, std::move(text), clock, clock + dur, out.dialogue.utterances.size()});
    clock += dur + 500;
  };
  for (std::size_t t = 0; t < turns; ++t) {
    push(SpeakerRole::Examiner, questions[t]);
    std::vector<std::string> parts = replies[t].before;
    parts.push_back(replies[t].answer);
    parts.insert(parts.end(), replies[t].after.begin(), replies[t].after.end());
    push(SpeakerRole::Patient, text::join(parts, " "));
  }
  return out;
}

}  // namespace sldx
