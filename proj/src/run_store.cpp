#include "sldx/run_store.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sldx/error.hpp"
#include "sldx/text.hpp"

namespace sldx {

using json = nlohmann::json;

std::string_view task_name(Task t) { return t == Task::Diagnose ? "diagnose" : "features"; }

Task parse_task(std::string_view s) {
  if (s == "diagnose") return Task::Diagnose;
  if (s == "features") return Task::Features;
  throw Error(ErrorCode::InvalidConfig, "unknown task '" + std::string(s) + "'");
}

void RunConfig::validate() const {
  if (parallelism < 1) throw Error(ErrorCode::InvalidConfig, "parallelism must be >= 1");
  if (corpus_path.empty()) throw Error(ErrorCode::InvalidConfig, "corpus path required");
  if (output_dir.empty()) throw Error(ErrorCode::InvalidConfig, "output dir required");
  if (included_scenarios) {
    for (int id : *included_scenarios) {
      if (id < 1 || id > kScenarioCount || !ScenarioId(id).included()) {
        throw Error(ErrorCode::InvalidConfig, "scenario " + std::to_string(id) + " is not an analysed scenario");
      }
    }
  }
  backend.validate();
}

std::string RunConfig::snapshot() const {
  std::map<std::string, std::string> kv;
  kv["corpus"] = corpus_path.string();
  kv["backend"] = backend_kind_name(backend.backend);
  kv["model"] = backend.model_id;
  kv["endpoint"] = backend.endpoint_url;
  kv["temperature"] = std::to_string(backend.temperature);
  kv["timeout_ms"] = std::to_string(backend.timeout_ms);
  kv["max_retries"] = std::to_string(backend.max_retries);
  kv["script"] = backend.script_path.string();
  kv["prompt_template_version"] = prompt_template_version;
  kv["mode"] = aggregation_mode_name(aggregation_mode);
  kv["parallelism"] = std::to_string(parallelism);
  kv["strict_parse"] = strict_parse ? "true" : "false";
  kv["task"] = task_name(task);
  kv["max_prompt_chars"] = std::to_string(max_prompt_chars);
  std::string scen;
  if (included_scenarios) {
    for (int id : *included_scenarios) scen += (scen.empty() ? "" : ",") + std::to_string(id);
  }
  kv["scenarios"] = scen;
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

// ---------------------------------------------------------------------------

namespace {

json opt_label(const std::optional<BinaryLabel>& l) { return l ? json(to_int(*l)) : json(nullptr); }

std::optional<BinaryLabel> label_from(const json& v) {
  if (v.is_null()) return std::nullopt;
  const int i = v.get<int>();
  if (i != 0 && i != 1) throw Error(ErrorCode::SchemaViolation, "label must be 0 or 1");
  return label_from_bool(i == 1);
}

VerdictValue verdict_from(const std::string& s) {
  if (s == "yes") return VerdictValue::Affirmative;
  if (s == "no") return VerdictValue::Negative;
  if (s == "indeterminate") return VerdictValue::Indeterminate;
  throw Error(ErrorCode::SchemaViolation, "unknown verdict '" + s + "'");
}

}  // namespace

std::string record_to_json(const RunRecord& r) {
  json root;
  root["run_id"] = r.run_id;
  root["tool_version"] = r.tool_version;
  root["producer"] = r.producer;
  root["task"] = task_name(r.task);
  root["backend"] = r.backend;
  root["model_id"] = r.model_id;
  root["prompt_template_version"] = r.prompt_template_version;
  root["aggregation_mode"] = aggregation_mode_name(r.aggregation_mode);
  root["strict_parse"] = r.strict_parse;
  root["counters"] = {{"requests", r.counters.requests},
                      {"failures", r.counters.failures},
                      {"indeterminate", r.counters.indeterminate},
                      {"warnings", r.counters.warnings},
                      {"degenerate_skipped", r.counters.degenerate_skipped},
                      {"truncated", r.counters.truncated}};
  root["sessions"] = json::array();
  for (const auto& s : r.sessions) {
    json js;
    js["subject_id"] = s.subject_id;
    js["session_id"] = s.session_id;
    js["predicted_label"] = opt_label(s.predicted_label);
    js["true_label"] = opt_label(s.true_label);
    js["indeterminate_count"] = s.indeterminate_count;
    js["scenarios"] = json::array();
    for (const auto& o : s.scenario_outcomes) {
      json jo;
      jo["scenario_id"] = o.scenario.value();
      if (o.verdict) {
        jo["verdict"] = verdict_name(o.verdict->value);
        jo["evidence"] = o.verdict->evidence ? json::array({o.verdict->evidence->begin, o.verdict->evidence->end})
                                             : json(nullptr);
      } else {
        jo["verdict"] = nullptr;
        jo["evidence"] = nullptr;
      }
      jo["features"] = o.features ? json(o.features->codes()) : json(nullptr);
      jo["label"] = opt_label(o.label);
      jo["warnings"] = o.warnings;
      jo["error"] = o.error ? json(*o.error) : json(nullptr);
      js["scenarios"].push_back(std::move(jo));
    }
    root["sessions"].push_back(std::move(js));
  }
  return root.dump(2) + "\n";
}

RunRecord record_from_json(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedFile, e.what());
  }
  try {
    RunRecord r;
    r.run_id = root.at("run_id").get<std::string>();
    r.tool_version = root.at("tool_version").get<std::string>();
    r.producer = root.at("producer").get<std::string>();
    r.task = parse_task(root.at("task").get<std::string>());
    r.backend = root.at("backend").get<std::string>();
    r.model_id = root.at("model_id").get<std::string>();
    r.prompt_template_version = root.at("prompt_template_version").get<std::string>();
    r.aggregation_mode = parse_aggregation_mode(root.at("aggregation_mode").get<std::string>());
    r.strict_parse = root.at("strict_parse").get<bool>();
    const json& c = root.at("counters");
    r.counters.requests = c.at("requests").get<std::size_t>();
    r.counters.failures = c.at("failures").get<std::size_t>();
    r.counters.indeterminate = c.at("indeterminate").get<std::size_t>();
    r.counters.warnings = c.at("warnings").get<std::size_t>();
    r.counters.degenerate_skipped = c.at("degenerate_skipped").get<std::size_t>();
    r.counters.truncated = c.at("truncated").get<std::size_t>();
    for (const json& js : root.at("sessions")) {
      SubjectOutcome s;
      s.subject_id = js.at("subject_id").get<std::string>();
      s.session_id = js.at("session_id").get<std::string>();
      s.predicted_label = label_from(js.at("predicted_label"));
      s.true_label = label_from(js.at("true_label"));
      s.indeterminate_count = js.at("indeterminate_count").get<std::size_t>();
      for (const json& jo : js.at("scenarios")) {
        ScenarioOutcome o;
        o.scenario = ScenarioId(jo.at("scenario_id").get<int>());
        if (!jo.at("verdict").is_null()) {
          Verdict v;
          v.value = verdict_from(jo.at("verdict").get<std::string>());
          if (!jo.at("evidence").is_null()) {
            v.evidence = TextSpan{jo.at("evidence").at(0).get<std::size_t>(), jo.at("evidence").at(1).get<std::size_t>()};
          }
          o.verdict = v;
        }
        if (!jo.at("features").is_null()) {
          FeatureSet fs;
          for (const json& code : jo.at("features")) fs.insert(canonical_feature(code.get<std::string>()));
          o.features = fs;
        }
        o.label = label_from(jo.at("label"));
        o.warnings = jo.at("warnings").get<std::vector<std::string>>();
        if (!jo.at("error").is_null()) o.error = jo.at("error").get<std::string>();
        s.scenario_outcomes.push_back(std::move(o));
      }
      r.sessions.push_back(std::move(s));
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("run record: ") + e.what());
  }
}

std::string results_csv(const RunRecord& r) {
  std::string out = "session_id,subject_id,true_label,predicted_label,scenarios_analysed,features\n";
  auto lab = [](const std::optional<BinaryLabel>& l) { return l ? std::to_string(to_int(*l)) : std::string(); };
  for (const auto& s : r.sessions) {
    FeatureSet all;
    std::size_t analysed = 0;
    for (const auto& o : s.scenario_outcomes) {
      if (o.features) all |= *o.features;
      if (o.features || o.verdict) ++analysed;
    }
    out += s.session_id + "," + s.subject_id + "," + lab(s.true_label) + "," + lab(s.predicted_label) + "," +
           std::to_string(analysed) + "," + text::join(all.codes(), " ") + "\n";
  }
  return out;
}

std::filesystem::path run_dir(const std::filesystem::path& output_dir, const std::string& run_id) {
  return output_dir / "runs" / run_id;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_run(const std::filesystem::path& output_dir, const RunRecord& r, const std::string& config_snapshot,
               const std::optional<std::string>& execution_json) {
  const auto dir = run_dir(output_dir, r.run_id);
  write_text_file(dir / "config.snapshot", config_snapshot);
  write_text_file(dir / "record.json", record_to_json(r));
  write_text_file(dir / "results.csv", results_csv(r));
  if (execution_json) write_text_file(dir / "execution.json", *execution_json);
}

RunRecord read_run(const std::filesystem::path& output_dir, const std::string& run_id) {
  const auto path = run_dir(output_dir, run_id) / "record.json";
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::RunNotFound, path.string());
  return record_from_json(read_text_file(path));
}

}  // namespace sldx
