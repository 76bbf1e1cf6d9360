#include "sldx/corpus.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sldx/error.hpp"
#include "sldx/text.hpp"

namespace sldx {

using json = nlohmann::json;

namespace {

struct ScenarioInfo {
  std::string_view name;
  bool included;
};

constexpr std::array<ScenarioInfo, kScenarioCount> kScenarios = {{
    {"Construction Task", false},
    {"Telling a Story from a Book", false},
    {"Description of a Picture", true},
    {"Conversation and Reporting", true},
    {"Current Work and School", true},
    {"Social Difficulties and Annoyance", true},
    {"Emotions", true},
    {"Demonstration Task", false},
    {"Cartoons", true},
    {"Break", false},
    {"Daily Living", true},
    {"Friends, Relationships, and Marriage", true},
    {"Loneliness", true},
    {"Plans and Hopes", true},
    {"Creating a Story", true},
}};

constexpr std::array<std::string_view, kFeatureCount> kFeatureCodes = {
    "F1", "F2", "F3", "F4", "F5", "F6", "F7", "F8", "F9", "F10"};

constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "Echoic Repetition",
    "Unconventional Content",
    "Pronoun Displacement",
    "Incongruous Humor Timing",
    "Formalistic Language Use",
    "Superfluous Phrase Attachment",
    "Excessive Social Phrasing",
    "Monotone Social Expression",
    "Stereotyped Media Quoting",
    "Clichéd Verbal Substitutions",
};

}  // namespace

// ---------------------------------------------------------------------------

ScenarioId::ScenarioId(int id) : id_(id) {
  if (id < 1 || id > kScenarioCount) {
    throw Error(ErrorCode::OutOfRange, "scenario id " + std::to_string(id) + " not in 1..15");
  }
}

std::string_view ScenarioId::name() const noexcept { return kScenarios[id_ - 1].name; }

bool ScenarioId::included() const noexcept { return kScenarios[id_ - 1].included; }

const std::vector<ScenarioId>& all_scenarios() {
  static const std::vector<ScenarioId> all = [] {
    std::vector<ScenarioId> v;
    for (int i = 1; i <= kScenarioCount; ++i) v.emplace_back(i);
    return v;
  }();
  return all;
}

const std::vector<ScenarioId>& included_scenarios() {
  static const std::vector<ScenarioId> inc = [] {
    std::vector<ScenarioId> v;
    for (const auto& s : all_scenarios()) {
      if (s.included()) v.push_back(s);
    }
    return v;
  }();
  return inc;
}

std::string_view role_name(SpeakerRole role) {
  switch (role) {
    case SpeakerRole::Examiner: return "examiner";
    case SpeakerRole::Patient: return "patient";
    case SpeakerRole::Unknown: return "unknown";
  }
  return "unknown";
}

bool ScenarioDialogue::degenerate() const {
  bool examiner = false;
  bool patient = false;
  for (const auto& u : utterances) {
    examiner |= u.role == SpeakerRole::Examiner;
    patient |= u.role == SpeakerRole::Patient;
  }
  return !(examiner && patient);
}

bool ScenarioDialogue::has_unknown_roles() const {
  for (const auto& u : utterances) {
    if (u.role == SpeakerRole::Unknown) return true;
  }
  return false;
}

void reindex(std::vector<Utterance>& utterances) {
  for (std::size_t i = 0; i < utterances.size(); ++i) utterances[i].index = i;
}

// ---------------------------------------------------------------------------

std::string_view feature_code(FeatureId f) { return kFeatureCodes[feature_index(f)]; }

std::string_view feature_name(FeatureId f) { return kFeatureNames[feature_index(f)]; }

std::optional<FeatureId> try_canonical_feature(std::string_view token) {
  const std::string norm = text::ascii_lower(text::collapse_whitespace(token));
  for (FeatureId f : kAllFeatures) {
    if (norm == text::ascii_lower(feature_code(f)) || norm == text::ascii_lower(feature_name(f))) {
      return f;
    }
  }
  return std::nullopt;
}

FeatureId canonical_feature(std::string_view token) {
  if (auto f = try_canonical_feature(token)) return *f;
  throw Error(ErrorCode::UnknownFeature, std::string(token));
}

FeatureSet::FeatureSet(std::initializer_list<FeatureId> features) {
  for (FeatureId f : features) insert(f);
}

FeatureSet FeatureSet::from_mask(std::uint16_t mask) {
  FeatureSet s;
  s.mask_ = static_cast<std::uint16_t>(mask & 0x3FF);
  return s;
}

int FeatureSet::size() const noexcept {
  int n = 0;
  for (std::uint16_t m = mask_; m; m &= static_cast<std::uint16_t>(m - 1)) ++n;
  return n;
}

std::vector<FeatureId> FeatureSet::members() const {
  std::vector<FeatureId> out;
  for (FeatureId f : kAllFeatures) {
    if (contains(f)) out.push_back(f);
  }
  return out;
}

std::vector<std::string> FeatureSet::codes() const {
  std::vector<std::string> out;
  for (FeatureId f : members()) out.emplace_back(feature_code(f));
  return out;
}

std::string FeatureSet::to_string() const { return "{" + text::join(codes(), ",") + "}"; }

BinaryLabel binarize_a4(int a4) {
  if (a4 < 0 || a4 > 3) {
    throw Error(ErrorCode::OutOfRange, "a4 score " + std::to_string(a4) + " not in 0..3");
  }
  return label_from_bool(a4 > 0);
}

// ---------------------------------------------------------------------------
// Validation

std::vector<Violation> validate_session(const SessionTranscript& s) {
  std::vector<Violation> out;
  auto add = [&](Severity sev, std::string loc, std::string msg) {
    out.push_back({sev, s.session_id, std::move(loc), std::move(msg)});
  };
  if (s.session_id.empty()) add(Severity::Error, "session_id", "session_id empty");
  if (s.subject_id.empty()) add(Severity::Error, "subject_id", "subject_id empty");
  if (s.a4_true && (*s.a4_true < 0 || *s.a4_true > 3)) {
    add(Severity::Error, "a4_score", "a4_true out of range");
  }
  for (const auto& [sid, d] : s.dialogues) {
    const std::string base = "scenarios[" + std::to_string(sid.value()) + "]";
    if (d.scenario != sid) add(Severity::Error, base, "scenario key mismatch");
    for (std::size_t i = 0; i < d.utterances.size(); ++i) {
      const auto& u = d.utterances[i];
      const std::string loc = base + ".utterances[" + std::to_string(i) + "]";
      if (u.index != i) add(Severity::Error, loc + ".index", "utterance index gap");
      if (text::collapse_whitespace(u.text).empty()) add(Severity::Error, loc + ".text", "empty utterance text");
      if (u.start_ms && *u.start_ms < 0) add(Severity::Error, loc + ".start_ms", "negative start_ms");
      if (u.start_ms && u.end_ms && *u.start_ms > *u.end_ms) {
        add(Severity::Error, loc, "start_ms after end_ms");
      }
      if (u.role == SpeakerRole::Unknown) add(Severity::Error, loc + ".speaker", "unknown speaker role");
    }
    if (d.degenerate()) add(Severity::Warning, base, "degenerate dialogue");
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON schema

namespace {

struct Ctx {
  const LoadOptions& opts;
  std::vector<std::string>& warnings;
  std::string session_id;
};

[[noreturn]] void schema_error(const Ctx& ctx, const std::string& path, const std::string& what) {
  std::string msg = what + " at " + path;
  if (!ctx.session_id.empty()) msg += " (session " + ctx.session_id + ")";
  throw Error(ErrorCode::SchemaViolation, msg);
}

void check_fields(Ctx& ctx, const json& obj, const std::string& path,
                  std::initializer_list<std::string_view> known) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto k : known) ok |= (key == k);
    if (ok) continue;
    if (ctx.opts.strict_fields) schema_error(ctx, path + "." + key, "unknown field");
    ctx.warnings.push_back("ignored unknown field " + path + "." + key);
  }
}

const json& require(const Ctx& ctx, const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(ctx, path + "." + key, "missing field");
  return *it;
}

std::optional<std::int64_t> opt_int(const Ctx& ctx, const json& obj, const char* key,
                                    const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_integer()) schema_error(ctx, path + "." + key, "expected integer or null");
  return it->get<std::int64_t>();
}

std::string req_string(const Ctx& ctx, const json& obj, const char* key, const std::string& path) {
  const json& v = require(ctx, obj, key, path);
  if (!v.is_string()) schema_error(ctx, path + "." + key, "expected string");
  return v.get<std::string>();
}

SpeakerRole parse_role(const Ctx& ctx, const std::string& s, const std::string& path) {
  const std::string r = text::ascii_lower(s);
  if (r == "examiner") return SpeakerRole::Examiner;
  if (r == "patient") return SpeakerRole::Patient;
  if (r == "unknown") return SpeakerRole::Unknown;
  schema_error(ctx, path, "speaker must be \"examiner\" or \"patient\"");
}

SessionTranscript parse_session(Ctx& ctx, const json& js, const std::string& path) {
  if (!js.is_object()) schema_error(ctx, path, "expected object");
  SessionTranscript s;
  s.session_id = req_string(ctx, js, "session_id", path);
  ctx.session_id = s.session_id;
  s.subject_id = req_string(ctx, js, "subject_id", path);
  check_fields(ctx, js, path, {"subject_id", "session_id", "a4_score", "scenarios"});
  if (auto a4 = opt_int(ctx, js, "a4_score", path)) s.a4_true = static_cast<int>(*a4);

  const json& scenarios = require(ctx, js, "scenarios", path);
  if (!scenarios.is_array()) schema_error(ctx, path + ".scenarios", "expected array");
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const std::string sp = path + ".scenarios[" + std::to_string(i) + "]";
    const json& sc = scenarios[i];
    if (!sc.is_object()) schema_error(ctx, sp, "expected object");
    check_fields(ctx, sc, sp, {"scenario_id", "utterances"});
    const json& idv = require(ctx, sc, "scenario_id", sp);
    if (!idv.is_number_integer()) schema_error(ctx, sp + ".scenario_id", "expected integer");
    const auto id = idv.get<std::int64_t>();
    if (id < 1 || id > kScenarioCount) schema_error(ctx, sp + ".scenario_id", "scenario_id not in 1..15");
    ScenarioDialogue d{ScenarioId(static_cast<int>(id)), {}};
    if (s.dialogues.contains(d.scenario)) schema_error(ctx, sp + ".scenario_id", "duplicate scenario");

    const json& utts = require(ctx, sc, "utterances", sp);
    if (!utts.is_array()) schema_error(ctx, sp + ".utterances", "expected array");
    for (std::size_t k = 0; k < utts.size(); ++k) {
      const std::string up = sp + ".utterances[" + std::to_string(k) + "]";
      const json& u = utts[k];
      if (!u.is_object()) schema_error(ctx, up, "expected object");
      check_fields(ctx, u, up, {"speaker", "text", "start_ms", "end_ms"});
      Utterance utt;
      utt.role = parse_role(ctx, req_string(ctx, u, "speaker", up), up + ".speaker");
      utt.text = req_string(ctx, u, "text", up);
      utt.start_ms = opt_int(ctx, u, "start_ms", up);
      utt.end_ms = opt_int(ctx, u, "end_ms", up);
      utt.index = k;
      d.utterances.push_back(std::move(utt));
    }
    s.dialogues.emplace(d.scenario, std::move(d));
  }
  return s;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Corpus parse_corpus(std::string_view json_text, const LoadOptions& opts) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedFile, e.what());
  }
  Corpus corpus;
  Ctx ctx{opts, corpus.warnings, {}};
  if (!root.is_object()) schema_error(ctx, "$", "expected object");
  check_fields(ctx, root, "$", {"corpus_version", "sessions"});
  const json& version = require(ctx, root, "corpus_version", "$");
  if (!version.is_string() || version.get<std::string>() != "1") {
    schema_error(ctx, "$.corpus_version", "unsupported corpus_version");
  }
  const json& sessions = require(ctx, root, "sessions", "$");
  if (!sessions.is_array()) schema_error(ctx, "$.sessions", "expected array");

  std::set<std::string> seen;
  for (std::size_t i = 0; i < sessions.size(); ++i) {
    ctx.session_id.clear();
    SessionTranscript s = parse_session(ctx, sessions[i], "$.sessions[" + std::to_string(i) + "]");
    if (!seen.insert(s.session_id).second) {
      throw Error(ErrorCode::DuplicateSessionId, s.session_id);
    }
    corpus.sessions.push_back(std::move(s));
  }
  return corpus;
}

Corpus load_corpus_unvalidated(const std::filesystem::path& path, const LoadOptions& opts) {
  return parse_corpus(read_file(path), opts);
}

Corpus load_corpus(const std::filesystem::path& path, const LoadOptions& opts) {
  Corpus corpus = load_corpus_unvalidated(path, opts);
  for (const auto& s : corpus.sessions) {
    for (const auto& v : validate_session(s)) {
      if (v.severity == Severity::Error) {
        throw Error(ErrorCode::SchemaViolation,
                    "session " + v.session_id + " " + v.location + ": " + v.message);
      }
      corpus.warnings.push_back("session " + v.session_id + " " + v.location + ": " + v.message);
    }
  }
  return corpus;
}

std::string serialize_corpus(const std::vector<SessionTranscript>& sessions) {
  json root;
  root["corpus_version"] = "1";
  root["sessions"] = json::array();
  for (const auto& s : sessions) {
    json js;
    js["subject_id"] = s.subject_id;
    js["session_id"] = s.session_id;
    js["a4_score"] = s.a4_true ? json(*s.a4_true) : json(nullptr);
    js["scenarios"] = json::array();
    for (const auto& [sid, d] : s.dialogues) {
      json sc;
      sc["scenario_id"] = sid.value();
      sc["utterances"] = json::array();
      for (const auto& u : d.utterances) {
        json ju;
        ju["speaker"] = role_name(u.role);
        ju["text"] = u.text;
        ju["start_ms"] = u.start_ms ? json(*u.start_ms) : json(nullptr);
        ju["end_ms"] = u.end_ms ? json(*u.end_ms) : json(nullptr);
        sc["utterances"].push_back(std::move(ju));
      }
      js["scenarios"].push_back(std::move(sc));
    }
    root["sessions"].push_back(std::move(js));
  }
  return root.dump(2) + "\n";
}

}  // namespace sldx
