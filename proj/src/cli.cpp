#include "sldx/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <map>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sldx/analytics.hpp"
#include "sldx/classifier.hpp"
#include "sldx/corpus.hpp"
#include "sldx/diarization.hpp"
#include "sldx/lexical_oracle.hpp"
#include "sldx/llm_gateway.hpp"
#include "sldx/prompting.hpp"
#include "sldx/response_parser.hpp"
#include "sldx/run_store.hpp"
#include "sldx/text.hpp"

namespace sldx {

namespace fs = std::filesystem;
using json = nlohmann::json;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedFile:
    case ErrorCode::SchemaViolation:
    case ErrorCode::DuplicateSessionId:
    case ErrorCode::IoError:
    case ErrorCode::InvalidConfig:
    case ErrorCode::UnknownFeature:
      return kExitMalformed;
    default:
      return kExitDomain;
  }
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

FeatureSet parse_feature_list(const std::string& csv) {
  FeatureSet fs;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = text::collapse_whitespace(item);
    if (!item.empty()) fs.insert(canonical_feature(item));
  }
  return fs;
}

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = text::collapse_whitespace(item);
    if (item.empty()) continue;
    try {
      std::size_t pos = 0;
      out.push_back(std::stoi(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidConfig, "not an integer: '" + item + "'");
    }
  }
  return out;
}

std::string auto_run_id(const std::string& snapshot) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return std::string(buf) + "-" + sha256(snapshot).hex().substr(0, 8);
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<FeatureSet> session_unions(const RunRecord& r) {
  std::vector<FeatureSet> out;
  for (const auto& s : r.sessions) {
    FeatureSet u;
    bool any = false;
    for (const auto& o : s.scenario_outcomes) {
      if (o.features) {
        u |= *o.features;
        any = true;
      }
    }
    if (any) out.push_back(u);
  }
  return out;
}

std::size_t feature_outcome_count(const RunRecord& r) {
  std::size_t n = 0;
  for (const auto& s : r.sessions) {
    for (const auto& o : s.scenario_outcomes) n += o.features ? 1 : 0;
  }
  return n;
}

std::optional<BinaryLabel> feature_subject_label(const SubjectOutcome& s, AggregationMode mode) {
  std::vector<ScenarioOutcome> with;
  for (const auto& o : s.scenario_outcomes) {
    if (o.features) with.push_back(o);
  }
  if (with.empty()) return std::nullopt;
  return aggregate_feature_labels(with, mode);
}

std::optional<BinaryLabel> verdict_subject_label(const SubjectOutcome& s, std::size_t& indeterminate) {
  std::vector<Verdict> vs;
  for (const auto& o : s.scenario_outcomes) {
    if (o.verdict) vs.push_back(*o.verdict);
  }
  if (vs.empty()) return std::nullopt;
  const VerdictAggregate agg = aggregate_verdicts(vs);
  indeterminate = agg.indeterminate_count;
  return agg.label;
}

// ---------------------------------------------------------------------------

struct IngestArgs {
  std::string corpus;
  bool strict_schema = false;
};

int cmd_ingest(const IngestArgs& a, std::ostream& out, std::ostream& err) {
  const Corpus corpus = load_corpus_unvalidated(a.corpus, LoadOptions{a.strict_schema});
  for (const auto& w : corpus.warnings) err << "warning: " << w << "\n";
  std::size_t errors = 0;
  std::size_t warnings = 0;
  for (const auto& s : corpus.sessions) {
    for (const auto& v : validate_session(s)) {
      const bool is_error = v.severity == Severity::Error;
      (is_error ? errors : warnings) += 1;
      out << (is_error ? "violation" : "warning") << ": session " << v.session_id << " " << v.location << ": "
          << v.message << "\n";
    }
  }
  out << corpus.sessions.size() << " sessions, " << errors << " violations, " << warnings << " warnings\n";
  return errors == 0 ? kExitOk : kExitDomain;
}

// ---------------------------------------------------------------------------

struct RunArgs {
  RunConfig cfg;
  std::string backend = "scripted";
  std::string task = "diagnose";
  std::string mode = "per-scenario-or";
  std::string scenarios;
  std::string run_id;
  std::string cache_dir;
  bool no_cache = false;
};

struct PendingScenario {
  std::size_t session = 0;
  std::size_t outcome = 0;
};

int cmd_run(RunArgs a, std::ostream& out, std::ostream& err) {
  RunConfig& cfg = a.cfg;
  cfg.backend.backend = parse_backend_kind(a.backend);
  cfg.task = parse_task(a.task);
  cfg.aggregation_mode = parse_aggregation_mode(a.mode);
  if (!a.scenarios.empty()) cfg.included_scenarios = parse_int_list(a.scenarios);
  if (!a.no_cache) cfg.backend.cache_dir = a.cache_dir.empty() ? cfg.output_dir / "cache" : fs::path(a.cache_dir);
  cfg.validate();

  const Corpus corpus = load_corpus(cfg.corpus_path);
  for (const auto& w : corpus.warnings) err << "warning: " << w << "\n";

  std::vector<ScenarioId> scenarios;
  if (cfg.included_scenarios) {
    for (int id : *cfg.included_scenarios) scenarios.emplace_back(id);
    std::sort(scenarios.begin(), scenarios.end());
    scenarios.erase(std::unique(scenarios.begin(), scenarios.end()), scenarios.end());
  } else {
    scenarios = included_scenarios();
  }

  // Scripted runs salt the model id with the script digest so cached answers
  // never outlive the script that produced them.
  std::string model_id = cfg.backend.model_id;
  if (cfg.backend.backend == BackendKind::Scripted) {
    if (cfg.backend.script_path.empty()) throw Error(ErrorCode::InvalidConfig, "--script is required for the scripted backend");
    model_id += "+script-" + sha256(read_text_file(cfg.backend.script_path)).hex().substr(0, 12);
  }
  if (cfg.backend.backend == BackendKind::Replay && cfg.backend.cache_dir.empty()) {
    throw Error(ErrorCode::InvalidConfig, "replay needs a cache directory");
  }
  BackendConfig req_cfg = cfg.backend;
  req_cfg.model_id = model_id;

  RunRecord rec;
  rec.task = cfg.task;
  rec.backend = std::string(backend_kind_name(cfg.backend.backend));
  rec.model_id = model_id;
  rec.prompt_template_version = cfg.prompt_template_version;
  rec.aggregation_mode = cfg.aggregation_mode;
  rec.strict_parse = cfg.strict_parse;

  std::vector<CompletionRequest> requests;
  std::vector<PendingScenario> pending;
  for (const auto& session : corpus.sessions) {
    SubjectOutcome so;
    so.subject_id = session.subject_id;
    so.session_id = session.session_id;
    if (session.a4_true) so.true_label = binarize_a4(*session.a4_true);
    for (ScenarioId sid : scenarios) {
      auto it = session.dialogues.find(sid);
      if (it == session.dialogues.end()) continue;
      ScenarioOutcome o;
      o.scenario = sid;
      if (it->second.degenerate()) {
        o.error = "skipped: degenerate dialogue";
        ++rec.counters.degenerate_skipped;
        so.scenario_outcomes.push_back(std::move(o));
        continue;
      }
      try {
        ScenarioDialogue d = it->second;
        bool truncated = false;
        if (cfg.max_prompt_chars > 0) std::tie(d, truncated) = truncate_dialogue(d, cfg.max_prompt_chars);
        RenderedPrompt p = cfg.task == Task::Diagnose ? build_diagnosis_prompt(d) : build_feature_prompt(d);
        p.truncated = truncated;
        if (truncated) {
          ++rec.counters.truncated;
          o.warnings.push_back("dialogue truncated to fit the prompt budget");
        }
        requests.push_back(CompletionRequest{std::move(p), req_cfg});
        pending.push_back({rec.sessions.size(), so.scenario_outcomes.size()});
      } catch (const Error& e) {
        if (e.code() != ErrorCode::UnknownRolePresent && e.code() != ErrorCode::BudgetTooSmall) throw;
        o.error = std::string("skipped: ") + e.what();
      }
      so.scenario_outcomes.push_back(std::move(o));
    }
    rec.sessions.push_back(std::move(so));
  }

  const std::string snapshot = cfg.snapshot();
  rec.run_id = a.run_id.empty() ? auto_run_id(snapshot) : a.run_id;

  Gateway gateway(make_backend(cfg.backend), cfg.backend.cache_dir);
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<BatchItem> items = run_batch(gateway, requests, cfg.parallelism);
  const auto wall_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();

  std::map<std::string, std::size_t> sources;
  rec.counters.requests = items.size();
  for (std::size_t i = 0; i < items.size(); ++i) {
    ScenarioOutcome& o = rec.sessions[pending[i].session].scenario_outcomes[pending[i].outcome];
    const BatchItem& item = items[i];
    if (!item.ok()) {
      ++rec.counters.failures;
      o.error = item.error_message;
      continue;
    }
    ++sources[std::string(source_name(item.result->source))];
    if (cfg.task == Task::Diagnose) {
      o.verdict = parse_verdict(item.result->text, cfg.strict_parse);
      o.label = label_from_bool(o.verdict->value == VerdictValue::Affirmative);
      if (o.verdict->value == VerdictValue::Indeterminate) ++rec.counters.indeterminate;
    } else {
      FeatureParse fp = parse_features(item.result->text);
      o.features = fp.features;
      o.label = classify_features(fp.features);
      for (auto& w : fp.warnings) o.warnings.push_back(std::move(w));
    }
  }
  for (auto& s : rec.sessions) {
    for (const auto& o : s.scenario_outcomes) rec.counters.warnings += o.warnings.size();
    if (cfg.task == Task::Diagnose) {
      s.predicted_label = verdict_subject_label(s, s.indeterminate_count);
    } else {
      s.predicted_label = feature_subject_label(s, cfg.aggregation_mode);
    }
  }

  json exec;
  exec["run_id"] = rec.run_id;
  exec["finished_at"] = utc_now();
  exec["wall_ms"] = wall_ms;
  exec["backend_calls"] = gateway.backend_calls();
  exec["cache_hits"] = gateway.cache_hits();
  exec["sources"] = sources;
  write_run(cfg.output_dir, rec, snapshot, exec.dump(2) + "\n");

  out << "run " << rec.run_id << ": " << rec.sessions.size() << " sessions, " << rec.counters.requests
      << " requests, " << rec.counters.failures << " failed, " << rec.counters.indeterminate << " indeterminate, "
      << rec.counters.warnings << " warnings\n";
  for (const auto& s : rec.sessions) {
    out << "  " << s.session_id << ": predicted "
        << (s.predicted_label ? std::to_string(to_int(*s.predicted_label)) : std::string("-")) << "\n";
  }
  out << "wrote " << run_dir(cfg.output_dir, rec.run_id).string() << "\n";
  if (rec.counters.requests > 0 && 2 * rec.counters.failures > rec.counters.requests) {
    err << "batch degraded: " << rec.counters.failures << " of " << rec.counters.requests << " requests failed\n";
    return kExitDegraded;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct EvaluateArgs {
  std::string out_dir = "sldx-out";
  std::string run_id;
  std::string mode;
  std::string corpus;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
  RunRecord rec = read_run(a.out_dir, a.run_id);

  std::map<std::string, std::optional<int>> truths;
  if (!a.corpus.empty()) {
    for (const auto& s : load_corpus(a.corpus).sessions) truths[s.session_id] = s.a4_true;
  }

  AggregationMode mode = rec.aggregation_mode;
  if (!a.mode.empty()) mode = parse_aggregation_mode(a.mode);
  std::string path_name = rec.task == Task::Diagnose ? "verdict-aggregation"
                                                     : "feature-rule/" + std::string(aggregation_mode_name(mode));

  std::vector<BinaryLabel> pred;
  std::vector<BinaryLabel> truth;
  std::size_t missing = 0;
  for (const auto& s : rec.sessions) {
    std::optional<BinaryLabel> t = s.true_label;
    if (!a.corpus.empty()) {
      auto it = truths.find(s.session_id);
      t = (it != truths.end() && it->second) ? std::optional(binarize_a4(*it->second)) : std::nullopt;
    }
    if (!t) {
      ++missing;
      err << "MissingGroundTruth: session " << s.session_id << "\n";
      continue;
    }
    std::optional<BinaryLabel> p = s.predicted_label;
    if (rec.task == Task::Features) p = feature_subject_label(s, mode);
    if (!p) {
      err << "no prediction: session " << s.session_id << "\n";
      continue;
    }
    pred.push_back(*p);
    truth.push_back(*t);
  }
  if (pred.empty()) {
    throw Error(missing > 0 ? ErrorCode::MissingGroundTruth : ErrorCode::EmptyInput, "no evaluable sessions");
  }

  const ConfusionMatrix cm = confusion(pred, truth);
  const std::vector<std::pair<std::string, MetricsReport>> rows{{path_name, metrics(cm)}};
  const fs::path reports = run_dir(a.out_dir, rec.run_id) / "reports";
  write_text_file(reports / "metrics.csv", metrics_csv(rows));
  write_text_file(reports / "metrics.md", metrics_markdown(rows));
  write_text_file(reports / "confusion.csv", "path,tp,fp,fn,tn\n" + path_name + "," + std::to_string(cm.tp) + "," +
                                                 std::to_string(cm.fp) + "," + std::to_string(cm.fn) + "," +
                                                 std::to_string(cm.tn) + "\n");
  out << "evaluated " << pred.size() << " sessions (" << missing << " without ground truth)\n";
  out << metrics_markdown(rows);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct StatsArgs {
  std::string kind;
  std::string out_dir = "sldx-out";
  std::vector<std::string> run_ids;
  std::string rows = "scenario";
};

int cmd_stats(const StatsArgs& a, std::ostream& out, std::ostream&) {
  if (a.run_ids.empty()) throw Error(ErrorCode::InvalidConfig, "--run-id is required");
  if (a.rows != "scenario" && a.rows != "session") throw Error(ErrorCode::InvalidConfig, "--rows must be scenario or session");
  std::vector<RunRecord> recs;
  for (const auto& id : a.run_ids) {
    recs.push_back(read_run(a.out_dir, id));
    if (feature_outcome_count(recs.back()) == 0) throw Error(ErrorCode::NoFeatureData, "run " + id);
  }
  const fs::path reports = run_dir(a.out_dir, recs.front().run_id) / "reports";
  const bool by_session = a.rows == "session";

  auto row_sets = [&](const RunRecord& r) {
    if (by_session) return session_unions(r);
    std::vector<FeatureSet> sets;
    for (const auto& s : r.sessions) {
      for (const auto& o : s.scenario_outcomes) {
        if (o.features) sets.push_back(*o.features);
      }
    }
    return sets;
  };

  if (a.kind == "corr") {
    if (recs.size() != 1) throw Error(ErrorCode::InvalidConfig, "corr takes exactly one run");
    FeatureMatrix m;
    m.rows = row_sets(recs.front());
    const CorrelationMatrix c = phi_matrix(m);
    write_text_file(reports / "phi.csv", phi_long_csv(c));
    write_text_file(reports / "phi_wide.csv", phi_wide_csv(c));
    write_text_file(reports / "phi.md", phi_markdown(c));
    out << phi_markdown(c);
  } else if (a.kind == "prevalence") {
    if (recs.size() != 1) throw Error(ErrorCode::InvalidConfig, "prevalence takes exactly one run");
    std::map<ScenarioId, std::vector<FeatureSet>> per;
    for (const auto& s : recs.front().sessions) {
      for (const auto& o : s.scenario_outcomes) {
        if (o.features) per[o.scenario].push_back(*o.features);
      }
    }
    const PrevalenceTable t = prevalence(per);
    write_text_file(reports / "prevalence.csv", prevalence_csv(t));
    write_text_file(reports / "prevalence.md", prevalence_markdown(t));
    out << prevalence_markdown(t);
  } else if (a.kind == "counts") {
    std::vector<std::pair<std::string, FeatureCounts>> cols;
    for (const auto& r : recs) {
      const auto sets = row_sets(r);
      cols.emplace_back(r.run_id, feature_counts(sets));
    }
    write_text_file(reports / "counts.csv", counts_csv(cols));
    write_text_file(reports / "counts.md", counts_markdown(cols));
    out << counts_markdown(cols);
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown stats kind '" + a.kind + "'");
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::uint64_t seed = 0;
  std::string features;
  int turns = 6;
  int sessions = 10;
  int scenarios_per_session = 3;
  bool random_subsets = false;
  std::string out_dir = "sldx-synth";
};

int cmd_synth(const SynthArgs& a, std::ostream& out, std::ostream&) {
  const FeatureSet requested = parse_feature_list(a.features);
  if (!requested.is_subset_of(detectable_features())) {
    throw Error(ErrorCode::UndetectableFeatureRequested,
                (requested & FeatureSet::from_mask(static_cast<std::uint16_t>(~detectable_features().mask())))
                    .to_string());
  }
  const auto& inc = included_scenarios();
  if (a.sessions < 1) throw Error(ErrorCode::InvalidConfig, "--sessions must be >= 1");
  if (a.scenarios_per_session < 1 || a.scenarios_per_session > static_cast<int>(inc.size())) {
    throw Error(ErrorCode::InvalidConfig, "--scenarios-per-session must be within 1.." + std::to_string(inc.size()));
  }

  std::vector<SessionTranscript> sessions;
  json truth_sessions = json::array();
  std::map<std::string, std::string> script;
  char idbuf[32];
  for (int i = 1; i <= a.sessions; ++i) {
    const std::uint64_t session_seed = splitmix64(a.seed * 1000003ULL + static_cast<std::uint64_t>(i));
    std::mt19937_64 rng(session_seed);
    std::vector<ScenarioId> pool = inc;
    for (std::size_t k = pool.size(); k > 1; --k) std::swap(pool[k - 1], pool[rng() % k]);
    pool.erase(pool.begin() + a.scenarios_per_session, pool.end());
    std::sort(pool.begin(), pool.end());

    SessionTranscript s;
    std::snprintf(idbuf, sizeof idbuf, "subj-%04d", i);
    s.subject_id = idbuf;
    std::snprintf(idbuf, sizeof idbuf, "synth-%04d", i);
    s.session_id = idbuf;
    FeatureSet session_union;
    json truth_scen = json::array();
    for (ScenarioId sid : pool) {
      FeatureSet injected = requested;
      if (a.random_subsets) {
        const std::uint64_t bits = rng();
        injected = FeatureSet{};
        int b = 0;
        for (FeatureId f : requested.members()) {
          if ((bits >> b++) & 1U) injected.insert(f);
        }
      }
      SynthSpec spec;
      spec.seed = splitmix64(session_seed ^ static_cast<std::uint64_t>(sid.value()));
      spec.injected = injected;
      spec.turns = a.turns;
      spec.scenario = sid;
      SyntheticDialogue sd = generate_synthetic(spec);
      session_union |= sd.ground_truth;
      truth_scen.push_back({{"scenario_id", sid.value()}, {"features", sd.ground_truth.codes()}});

      const auto codes = sd.ground_truth.codes();
      script[build_feature_prompt(sd.dialogue).content_hash.hex()] = codes.empty() ? "None" : text::join(codes, ", ");
      script[build_diagnosis_prompt(sd.dialogue).content_hash.hex()] =
          classify_features(sd.ground_truth) == BinaryLabel::One ? "Yes" : "No";
      s.dialogues.emplace(sid, std::move(sd.dialogue));
    }
    s.a4_true = to_int(classify_features(session_union));
    truth_sessions.push_back(
        {{"session_id", s.session_id}, {"features", session_union.codes()}, {"scenarios", std::move(truth_scen)}});
    sessions.push_back(std::move(s));
  }

  json truth;
  truth["seed"] = a.seed;
  truth["features"] = requested.codes();
  truth["random_subsets"] = a.random_subsets;
  truth["sessions"] = std::move(truth_sessions);
  json entries = json::array();
  for (const auto& [hash, text] : script) entries.push_back({{"prompt_hash", hash}, {"response_text", text}});

  const fs::path dir = a.out_dir;
  write_text_file(dir / "synth_corpus.json", serialize_corpus(sessions));
  write_text_file(dir / "synth_truth.json", truth.dump(2) + "\n");
  write_text_file(dir / "synth_script.json", json{{"entries", std::move(entries)}}.dump(2) + "\n");
  out << "wrote " << sessions.size() << " sessions to " << dir.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct OracleArgs {
  std::string corpus;
  std::string out_dir = "sldx-out";
  std::string run_id;
  std::string lexicon_dir;
  std::string mode = "per-scenario-or";
};

int cmd_oracle(const OracleArgs& a, std::ostream& out, std::ostream& err) {
  const OracleConfig cfg = a.lexicon_dir.empty() ? default_oracle_config() : load_oracle_config(a.lexicon_dir);
  const Corpus corpus = load_corpus(a.corpus);
  for (const auto& w : corpus.warnings) err << "warning: " << w << "\n";

  RunRecord rec;
  rec.producer = "lexical-oracle";
  rec.task = Task::Features;
  rec.backend = "none";
  rec.model_id = "lexical-oracle";
  rec.aggregation_mode = parse_aggregation_mode(a.mode);
  for (const auto& session : corpus.sessions) {
    SubjectOutcome so;
    so.subject_id = session.subject_id;
    so.session_id = session.session_id;
    if (session.a4_true) so.true_label = binarize_a4(*session.a4_true);
    for (const auto& [sid, d] : session.dialogues) {
      if (!sid.included()) continue;
      ScenarioOutcome o;
      o.scenario = sid;
      o.features = detect_all(d, cfg);
      o.label = classify_features(*o.features);
      so.scenario_outcomes.push_back(std::move(o));
    }
    so.predicted_label = feature_subject_label(so, rec.aggregation_mode);
    rec.sessions.push_back(std::move(so));
  }

  std::string snapshot = "corpus=" + a.corpus + "\nlexicon_dir=" + a.lexicon_dir + "\nmode=" +
                         std::string(aggregation_mode_name(rec.aggregation_mode)) + "\nproducer=lexical-oracle\n";
  rec.run_id = a.run_id.empty() ? auto_run_id(snapshot) : a.run_id;
  write_run(a.out_dir, rec, snapshot);
  const auto unions = session_unions(rec);
  for (std::size_t i = 0; i < rec.sessions.size() && i < unions.size(); ++i) {
    out << "  " << rec.sessions[i].session_id << ": " << unions[i].to_string() << "\n";
  }
  out << "wrote " << run_dir(a.out_dir, rec.run_id).string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct ImportArgs {
  std::string segments;
  std::string boundaries;
  std::string examiner_tag;
  std::string patient_tag;
  std::string subject_id;
  std::string session_id;
  int a4 = -1;
  bool merge = false;
  std::string out_file;
};

int cmd_import(const ImportArgs& a, std::ostream& out, std::ostream& err) {
  const auto segs = read_segments(a.segments);
  const auto bounds = read_boundaries(a.boundaries);
  RoleMap roles;
  if (!a.examiner_tag.empty() || !a.patient_tag.empty()) {
    if (a.examiner_tag.empty() || a.patient_tag.empty()) {
      throw Error(ErrorCode::InvalidConfig, "--examiner-tag and --patient-tag go together");
    }
    roles = manual_roles(a.examiner_tag, a.patient_tag);
  } else {
    roles = assign_roles(segs);
  }
  Segmentation seg = segment_by_boundaries(segs, roles, bounds);
  SessionTranscript s;
  s.subject_id = a.subject_id;
  s.session_id = a.session_id;
  if (a.a4 >= 0) s.a4_true = a.a4;
  for (auto& [sid, d] : seg.dialogues) {
    if (a.merge) {
      d.utterances = merge_adjacent(d.utterances);
      reindex(d.utterances);
    }
  }
  s.dialogues = std::move(seg.dialogues);
  for (const auto& v : validate_session(s)) {
    err << (v.severity == Severity::Error ? "violation: " : "warning: ") << v.location << ": " << v.message << "\n";
  }
  write_text_file(a.out_file, serialize_corpus({s}));
  out << "imported " << s.dialogues.size() << " scenarios (" << seg.dropped_count << " segments outside windows, "
      << seg.unknown_count << " with unknown speakers)\n";
  return kExitOk;
}

// `--config FILE` holds key=value lines naming long options of the chosen
// subcommand. Keys are injected as flags unless already given on the command
// line, so flags win.
std::vector<std::string> expand_config(CLI::App& app, const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::optional<std::string> config;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 == args.size()) throw Error(ErrorCode::InvalidConfig, "--config needs a file");
      config = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (!config) return rest;
  if (rest.empty()) throw Error(ErrorCode::InvalidConfig, "--config needs a subcommand");
  CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(rest.front());
  } catch (const CLI::OptionNotFound&) {
    throw Error(ErrorCode::InvalidConfig, "unknown subcommand '" + rest.front() + "'");
  }

  auto given = [&](const std::string& flag) {
    return std::any_of(rest.begin(), rest.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
  };
  std::vector<std::string> injected;
  std::istringstream in(read_text_file(*config));
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = text::collapse_whitespace(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidConfig, *config + ":" + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = text::collapse_whitespace(line.substr(0, eq));
    std::string value = text::collapse_whitespace(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string flag = "--" + key;
    const CLI::Option* opt = sub->get_option_no_throw(flag);
    if (opt == nullptr || key == "help") {
      throw Error(ErrorCode::InvalidConfig, *config + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    if (given(flag)) continue;
    if (opt->get_expected_min() == 0) {
      const std::string v = text::ascii_lower(value);
      if (v == "true" || v == "1" || v == "yes") {
        injected.push_back(flag);
      } else if (v != "false" && v != "0" && v != "no") {
        throw Error(ErrorCode::InvalidConfig, *config + ":" + std::to_string(lineno) + ": '" + key + "' is a switch");
      }
    } else {
      injected.push_back(flag);
      injected.push_back(value);
    }
  }
  rest.insert(rest.begin() + 1, injected.begin(), injected.end());
  return rest;
}

}  // namespace

// ---------------------------------------------------------------------------

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Speech and language deficit screening pipeline", "sldx"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));
  std::string config_unused;

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Validate a corpus file");
  c_ingest->add_option("--corpus", ingest.corpus, "Corpus JSON file")->required();
  c_ingest->add_flag("--strict-schema", ingest.strict_schema, "Reject unknown fields");

  RunArgs run;
  std::string run_out = run.cfg.output_dir.string();
  std::string run_corpus;
  std::string run_script;
  auto* c_run = app.add_subcommand("run", "Prompt the model for every session and scenario");
  c_run->add_option("--config", config_unused, "key=value configuration file; flags win");
  c_run->add_option("--corpus", run_corpus, "Corpus JSON file")->required();
  c_run->add_option("--backend", run.backend, "live, replay or scripted")->capture_default_str();
  c_run->add_option("--model", run.cfg.backend.model_id, "Model id")->capture_default_str();
  c_run->add_option("--endpoint", run.cfg.backend.endpoint_url, "Chat completions URL")->capture_default_str();
  c_run->add_option("--temperature", run.cfg.backend.temperature)->capture_default_str();
  c_run->add_option("--timeout-ms", run.cfg.backend.timeout_ms)->capture_default_str();
  c_run->add_option("--max-retries", run.cfg.backend.max_retries)->capture_default_str();
  c_run->add_option("--script", run_script, "Scripted responses file");
  c_run->add_option("--cache-dir", run.cache_dir, "Response cache (default <out>/cache)");
  c_run->add_flag("--no-cache", run.no_cache, "Disable the response cache");
  c_run->add_option("--task", run.task, "diagnose or features")->capture_default_str();
  c_run->add_option("--parallelism", run.cfg.parallelism)->capture_default_str();
  c_run->add_option("--out", run_out, "Output directory")->capture_default_str();
  c_run->add_option("--run-id", run.run_id, "Run id (default: timestamp + config hash)");
  c_run->add_option("--mode", run.mode, "per-scenario-or or union")->capture_default_str();
  c_run->add_flag("--strict-parse", run.cfg.strict_parse, "Only a bare yes/no counts as a verdict");
  c_run->add_option("--scenarios", run.scenarios, "Comma-separated scenario ids");
  c_run->add_option("--max-prompt-chars", run.cfg.max_prompt_chars, "Truncate dialogues to this budget (0: off)");

  EvaluateArgs evaluate;
  auto* c_eval = app.add_subcommand("evaluate", "Score a run against the corpus labels");
  c_eval->add_option("--config", config_unused, "key=value configuration file; flags win");
  c_eval->add_option("--out", evaluate.out_dir)->capture_default_str();
  c_eval->add_option("--run-id", evaluate.run_id)->required();
  c_eval->add_option("--mode", evaluate.mode, "Feature aggregation override: per-scenario-or or union");
  c_eval->add_option("--corpus", evaluate.corpus, "Take ground truth from this corpus instead of the run");

  StatsArgs stats;
  auto* c_stats = app.add_subcommand("stats", "Feature statistics for a run");
  c_stats->add_option("--config", config_unused, "key=value configuration file; flags win");
  c_stats->add_option("kind", stats.kind, "corr, prevalence or counts")->required();
  c_stats->add_option("--out", stats.out_dir)->capture_default_str();
  c_stats->add_option("--run-id", stats.run_ids, "Run id (repeat for counts)")->required();
  c_stats->add_option("--rows", stats.rows, "scenario or session")->capture_default_str();

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic corpus with known features");
  c_synth->add_option("--config", config_unused, "key=value configuration file; flags win");
  c_synth->add_option("--seed", synth.seed)->capture_default_str();
  c_synth->add_option("--features", synth.features, "Comma-separated subset of F1,F3,F6,F10");
  c_synth->add_option("--turns", synth.turns)->capture_default_str();
  c_synth->add_option("--sessions", synth.sessions)->capture_default_str();
  c_synth->add_option("--scenarios-per-session", synth.scenarios_per_session)->capture_default_str();
  c_synth->add_flag("--random-subsets", synth.random_subsets, "Draw a seeded subset of the features per dialogue");
  c_synth->add_option("--out", synth.out_dir)->capture_default_str();

  OracleArgs oracle;
  auto* c_oracle = app.add_subcommand("oracle", "Run the lexical detectors over a corpus");
  c_oracle->add_option("--config", config_unused, "key=value configuration file; flags win");
  c_oracle->add_option("--corpus", oracle.corpus)->required();
  c_oracle->add_option("--out", oracle.out_dir)->capture_default_str();
  c_oracle->add_option("--run-id", oracle.run_id);
  c_oracle->add_option("--lexicon-dir", oracle.lexicon_dir, "Directory with lexicon files (default: built in)");
  c_oracle->add_option("--mode", oracle.mode)->capture_default_str();

  ImportArgs import;
  auto* c_import = app.add_subcommand("import", "Build a corpus file from diarized segments");
  c_import->add_option("--config", config_unused, "key=value configuration file; flags win");
  c_import->add_option("--segments", import.segments)->required();
  c_import->add_option("--boundaries", import.boundaries)->required();
  c_import->add_option("--examiner-tag", import.examiner_tag);
  c_import->add_option("--patient-tag", import.patient_tag);
  c_import->add_option("--subject", import.subject_id)->required();
  c_import->add_option("--session", import.session_id)->required();
  c_import->add_option("--a4", import.a4, "Ground-truth A4 score 0..3");
  c_import->add_flag("--merge", import.merge, "Merge consecutive same-speaker segments");
  c_import->add_option("--out", import.out_file, "Output corpus file")->required();

  std::vector<std::string> argv_eff;
  try {
    argv_eff = expand_config(app, args);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  }

  try {
    std::vector<std::string> reversed(argv_eff.rbegin(), argv_eff.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitMalformed;
  }

  try {
    if (c_ingest->parsed()) return cmd_ingest(ingest, out, err);
    if (c_run->parsed()) {
      run.cfg.corpus_path = run_corpus;
      run.cfg.output_dir = run_out;
      run.cfg.backend.script_path = run_script;
      return cmd_run(std::move(run), out, err);
    }
    if (c_eval->parsed()) return cmd_evaluate(evaluate, out, err);
    if (c_stats->parsed()) return cmd_stats(stats, out, err);
    if (c_synth->parsed()) return cmd_synth(synth, out, err);
    if (c_oracle->parsed()) return cmd_oracle(oracle, out, err);
    if (c_import->parsed()) return cmd_import(import, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitMalformed;
}

}  // namespace sldx
