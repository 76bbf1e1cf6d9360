#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "sldx/cli.hpp"
#include "sldx/corpus.hpp"
#include "sldx/fixtures.hpp"
#include "sldx/prompting.hpp"
#include "sldx/run_store.hpp"
#include "test_util.hpp"

using namespace sldx;
using nlohmann::json;
using testutil::cli;

namespace {

SessionTranscript session(const std::string& id, std::optional<int> a4, std::vector<int> scenarios) {
  SessionTranscript s;
  s.subject_id = "subj-" + id;
  s.session_id = id;
  s.a4_true = a4;
  for (int sc : scenarios) {
    s.dialogues.emplace(ScenarioId(sc), testutil::dialogue(sc, {{'E', "Scenario " + std::to_string(sc) + " question?"},
                                                                {'P', "Answer for " + id + "."}}));
  }
  return s;
}

void write(const std::filesystem::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::string read(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string script_for(const std::vector<std::pair<RenderedPrompt, std::string>>& answers,
                       std::optional<std::string> fallback) {
  json entries = json::array();
  for (const auto& [p, text] : answers) entries.push_back({{"prompt_hash", p.content_hash.hex()}, {"response_text", text}});
  json doc{{"entries", entries}};
  if (fallback) doc["default_response"] = *fallback;
  return doc.dump();
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit 2") {
    CHECK(cli({}).code == kExitMalformed);
    CHECK(cli({"frobnicate"}).code == kExitMalformed);
    CHECK(cli({"run"}).code == kExitMalformed);
    CHECK(cli({"--help"}).code == kExitOk);
  }

  TEST_CASE("ingest") {
    testutil::TempDir tmp;
    const auto ok = cli({"ingest", "--corpus", (data_dir() / "fixtures/table5.json").string()});
    CHECK(ok.code == kExitOk);
    CHECK(ok.out.find("0 violations") != std::string::npos);

    auto bad = session("S-1", 2, {3});
    bad.a4_true = 5;
    write(tmp / "bad.json", serialize_corpus({bad}));
    const auto r = cli({"ingest", "--corpus", (tmp / "bad.json").string()});
    CHECK(r.code == kExitDomain);
    CHECK(r.out.find("a4_true out of range") != std::string::npos);

    CHECK(cli({"ingest", "--corpus", (tmp / "missing.json").string()}).code == kExitMalformed);
    write(tmp / "broken.json", "{\"sessions\": [");
    CHECK(cli({"ingest", "--corpus", (tmp / "broken.json").string()}).code == kExitMalformed);
  }

  TEST_CASE("diagnose run: one affirmative scenario decides") {
    testutil::TempDir tmp;
    const auto s = session("S-1", 1, {3, 5, 12});
    write(tmp / "c.json", serialize_corpus({s}));
    write(tmp / "script.json",
          script_for({{build_diagnosis_prompt(s.dialogues.at(ScenarioId(12))), "Yes"}}, std::string("No")));
    const auto out = (tmp / "out").string();
    const auto r = cli({"run", "--corpus", (tmp / "c.json").string(), "--script", (tmp / "script.json").string(),
                        "--out", out, "--run-id", "d1"});
    REQUIRE(r.code == kExitOk);
    const RunRecord rec = read_run(out, "d1");
    REQUIRE(rec.sessions.size() == 1);
    CHECK(rec.sessions[0].predicted_label == BinaryLabel::One);
    CHECK(rec.sessions[0].scenario_outcomes.size() == 3);
    CHECK(rec.counters.requests == 3);
  }

  TEST_CASE("features run, warm cache and replay") {
    testutil::TempDir tmp;
    const auto s = session("S-1", 2, {4});
    write(tmp / "c.json", serialize_corpus({s}));
    write(tmp / "script.json", script_for({}, std::string("F1, F9")));
    const auto out = (tmp / "out").string();
    const std::vector<std::string> base{"run",    "--corpus", (tmp / "c.json").string(), "--script",
                                        (tmp / "script.json").string(), "--task", "features", "--out", out};
    auto args = base;
    args.insert(args.end(), {"--run-id", "f1"});
    REQUIRE(cli(args).code == kExitOk);
    const RunRecord rec = read_run(out, "f1");
    CHECK(rec.sessions[0].scenario_outcomes[0].features == FeatureSet{FeatureId::F1, FeatureId::F9});
    CHECK(rec.sessions[0].predicted_label == BinaryLabel::One);

    args = base;
    args.insert(args.end(), {"--run-id", "f2"});
    REQUIRE(cli(args).code == kExitOk);
    const auto exec = json::parse(read(std::filesystem::path(out) / "runs/f2/execution.json"));
    CHECK(exec["backend_calls"] == 0);
    CHECK(exec["cache_hits"] == 1);
    json a = json::parse(read(std::filesystem::path(out) / "runs/f1/record.json"));
    json b = json::parse(read(std::filesystem::path(out) / "runs/f2/record.json"));
    a.erase("run_id");
    b.erase("run_id");
    CHECK(a == b);

    // Replay serves the same answers from the cache under the scripted model id.
    const std::string model = rec.model_id;
    const auto replay = cli({"run", "--corpus", (tmp / "c.json").string(), "--backend", "replay", "--model", model,
                             "--task", "features", "--out", out, "--run-id", "f3"});
    CHECK(replay.code == kExitOk);
    CHECK(read_run(out, "f3").sessions[0].scenario_outcomes[0].features == FeatureSet{FeatureId::F1, FeatureId::F9});
  }

  TEST_CASE("degraded batch exits 3 and still persists") {
    testutil::TempDir tmp;
    write(tmp / "c.json", serialize_corpus({session("S-1", 0, {3, 4, 5})}));
    write(tmp / "script.json", "[]");
    const auto out = (tmp / "out").string();
    const auto r = cli({"run", "--corpus", (tmp / "c.json").string(), "--script", (tmp / "script.json").string(),
                        "--out", out, "--run-id", "bad", "--no-cache"});
    CHECK(r.code == kExitDegraded);
    const RunRecord rec = read_run(out, "bad");
    CHECK(rec.counters.failures == 3);
    CHECK_FALSE(rec.sessions[0].predicted_label.has_value());
  }

  TEST_CASE("live backend is refused offline") {
    testutil::TempDir tmp;
    testutil::EnvGuard offline(kOfflineEnv, "1");
    write(tmp / "c.json", serialize_corpus({session("S-1", 0, {3})}));
    const auto r = cli({"run", "--corpus", (tmp / "c.json").string(), "--backend", "live", "--out",
                        (tmp / "out").string()});
    CHECK(r.code == kExitDomain);
    CHECK(r.err.find("OfflineMode") != std::string::npos);
  }

  TEST_CASE("evaluate") {
    testutil::TempDir tmp;
    const std::vector<SessionTranscript> sessions{session("A", 2, {3}), session("B", 0, {3}), session("C", 0, {3}),
                                                  session("D", 3, {3})};
    write(tmp / "c.json", serialize_corpus(sessions));
    // predictions [1,1,0,1] vs truths [1,0,0,1]
    std::vector<std::pair<RenderedPrompt, std::string>> answers;
    const char* verdicts[] = {"Yes", "Yes", "No", "Yes"};
    for (std::size_t k = 0; k < sessions.size(); ++k) {
      answers.emplace_back(build_diagnosis_prompt(sessions[k].dialogues.at(ScenarioId(3))), verdicts[k]);
    }
    write(tmp / "script.json", script_for(answers, std::nullopt));
    const auto out = (tmp / "out").string();
    REQUIRE(cli({"run", "--corpus", (tmp / "c.json").string(), "--script", (tmp / "script.json").string(), "--out",
                 out, "--run-id", "e1"})
                .code == kExitOk);
    const auto r = cli({"evaluate", "--out", out, "--run-id", "e1"});
    REQUIRE(r.code == kExitOk);
    CHECK(read(std::filesystem::path(out) / "runs/e1/reports/metrics.csv") ==
          "path,Accuracy,PPV,Sensitivity,F1 Score,flags\nverdict-aggregation,0.750000,0.666667,1.000000,0.800000,\n");
    CHECK(read(std::filesystem::path(out) / "runs/e1/reports/confusion.csv") ==
          "path,tp,fp,fn,tn\nverdict-aggregation,2,1,0,1\n");

    // Without ground truth nothing is evaluable.
    std::vector<SessionTranscript> unlabeled = sessions;
    for (auto& s : unlabeled) s.a4_true.reset();
    write(tmp / "u.json", serialize_corpus(unlabeled));
    REQUIRE(cli({"run", "--corpus", (tmp / "u.json").string(), "--script", (tmp / "script.json").string(), "--out",
                 out, "--run-id", "e2"})
                .code == kExitOk);
    const auto missing = cli({"evaluate", "--out", out, "--run-id", "e2"});
    CHECK(missing.code == kExitDomain);
    CHECK(missing.err.find("MissingGroundTruth") != std::string::npos);
    CHECK(cli({"evaluate", "--out", out, "--run-id", "nope"}).code == kExitDomain);
  }

  TEST_CASE("perfect predictions score 1.0") {
    testutil::TempDir tmp;
    const auto out = (tmp / "out").string();
    REQUIRE(cli({"synth", "--seed", "3", "--features", "F1,F3,F6,F10", "--random-subsets", "--sessions", "4", "--out",
                 (tmp / "syn").string()})
                .code == kExitOk);
    REQUIRE(cli({"run", "--corpus", (tmp / "syn/synth_corpus.json").string(), "--script",
                 (tmp / "syn/synth_script.json").string(), "--task", "features", "--mode", "union", "--out", out,
                 "--run-id", "p"})
                .code == kExitOk);
    REQUIRE(cli({"evaluate", "--out", out, "--run-id", "p"}).code == kExitOk);
    const std::string csv = read(std::filesystem::path(out) / "runs/p/reports/metrics.csv");
    CHECK(csv.find("feature-rule/union,1.000000,") != std::string::npos);
  }

  TEST_CASE("stats") {
    testutil::TempDir tmp;
    const auto out = (tmp / "out").string();
    REQUIRE(cli({"synth", "--seed", "9", "--features", "F1,F6", "--random-subsets", "--sessions", "2", "--out",
                 (tmp / "syn").string()})
                .code == kExitOk);
    REQUIRE(cli({"run", "--corpus", (tmp / "syn/synth_corpus.json").string(), "--script",
                 (tmp / "syn/synth_script.json").string(), "--task", "features", "--out", out, "--run-id", "s1"})
                .code == kExitOk);
    REQUIRE(cli({"stats", "corr", "--out", out, "--run-id", "s1"}).code == kExitOk);
    const std::string wide = read(std::filesystem::path(out) / "runs/s1/reports/phi_wide.csv");
    CHECK(std::count(wide.begin(), wide.end(), '\n') == 11);
    CHECK(wide.find("\nF2,,,,,,,,,,\n") != std::string::npos);

    REQUIRE(cli({"stats", "prevalence", "--out", out, "--run-id", "s1"}).code == kExitOk);
    const std::string prev = read(std::filesystem::path(out) / "runs/s1/reports/prevalence.csv");
    std::set<int> scenarios;
    const RunRecord rec = read_run(out, "s1");
    for (const auto& s : rec.sessions) {
      for (const auto& o : s.scenario_outcomes) scenarios.insert(o.scenario.value());
    }
    CHECK(static_cast<std::size_t>(std::count(prev.begin(), prev.end(), '\n')) == scenarios.size() + 1);

    REQUIRE(cli({"oracle", "--corpus", (tmp / "syn/synth_corpus.json").string(), "--out", out, "--run-id", "o1"})
                .code == kExitOk);
    REQUIRE(cli({"stats", "counts", "--out", out, "--run-id", "s1", "--run-id", "o1"}).code == kExitOk);
    const std::string counts = read(std::filesystem::path(out) / "runs/s1/reports/counts.csv");
    CHECK(counts.rfind("feature,s1,o1\n", 0) == 0);

    // A diagnose-only run has no feature data.
    REQUIRE(cli({"run", "--corpus", (tmp / "syn/synth_corpus.json").string(), "--script",
                 (tmp / "syn/synth_script.json").string(), "--out", out, "--run-id", "d"})
                .code == kExitOk);
    const auto none = cli({"stats", "corr", "--out", out, "--run-id", "d"});
    CHECK(none.code == kExitDomain);
    CHECK(none.err.find("NoFeatureData") != std::string::npos);
  }

  TEST_CASE("synth") {
    testutil::TempDir tmp;
    const auto a = (tmp / "a").string();
    const auto b = (tmp / "b").string();
    REQUIRE(cli({"synth", "--seed", "7", "--features", "F1,F6", "--sessions", "10", "--out", a}).code == kExitOk);
    REQUIRE(cli({"synth", "--seed", "7", "--features", "F1,F6", "--sessions", "10", "--out", b}).code == kExitOk);
    for (const char* f : {"synth_corpus.json", "synth_truth.json", "synth_script.json"}) {
      CHECK(read(std::filesystem::path(a) / f) == read(std::filesystem::path(b) / f));
    }
    const Corpus c = load_corpus(std::filesystem::path(a) / "synth_corpus.json");
    CHECK(c.sessions.size() == 10);
    const json truth = json::parse(read(std::filesystem::path(a) / "synth_truth.json"));
    REQUIRE(truth["sessions"].size() == 10);
    for (const auto& s : truth["sessions"]) CHECK(s["features"] == json::array({"F1", "F6"}));

    const auto r = cli({"synth", "--features", "F8", "--out", (tmp / "c").string()});
    CHECK(r.code == kExitDomain);
    CHECK(r.err.find("UndetectableFeatureRequested") != std::string::npos);
  }

  TEST_CASE("oracle") {
    testutil::TempDir tmp;
    const auto out = (tmp / "out").string();
    REQUIRE(cli({"oracle", "--corpus", (data_dir() / "fixtures/table5.json").string(), "--out", out, "--run-id", "t5"})
                .code == kExitOk);
    const RunRecord rec = read_run(out, "t5");
    CHECK(rec.producer == "lexical-oracle");
    CHECK(rec.sessions[0].scenario_outcomes[0].features->contains(FeatureId::F1));

    SessionTranscript neutral;
    neutral.subject_id = "n";
    neutral.session_id = "n-1";
    neutral.dialogues.emplace(ScenarioId(3), testutil::dialogue(3, {{'E', "How was your weekend?"},
                                                                    {'P', "It was nice. We went hiking."}}));
    write(tmp / "n.json", serialize_corpus({neutral}));
    REQUIRE(cli({"oracle", "--corpus", (tmp / "n.json").string(), "--out", out, "--run-id", "n"}).code == kExitOk);
    CHECK(read_run(out, "n").sessions[0].scenario_outcomes[0].features->empty());
    CHECK(cli({"oracle", "--corpus", (tmp / "n.json").string(), "--out", out, "--lexicon-dir",
               (data_dir() / "lexicons").string(), "--run-id", "n2"})
              .code == kExitOk);
  }

  TEST_CASE("config file with flags winning") {
    testutil::TempDir tmp;
    const auto s = session("S-1", 2, {4});
    write(tmp / "c.json", serialize_corpus({s}));
    write(tmp / "script.json", script_for({}, std::string("F2")));
    write(tmp / "run.conf", "# run defaults\ntask = features\nparallelism = 4\nstrict_parse = true\nscript = " +
                                (tmp / "script.json").string() + "\n");
    const auto out = (tmp / "out").string();
    REQUIRE(cli({"run", "--config", (tmp / "run.conf").string(), "--corpus", (tmp / "c.json").string(),
                 "--parallelism", "2", "--out", out, "--run-id", "cfg"})
                .code == kExitOk);
    const std::string snap = read(std::filesystem::path(out) / "runs/cfg/config.snapshot");
    CHECK(snap.find("task=features\n") != std::string::npos);
    CHECK(snap.find("parallelism=2\n") != std::string::npos);
    CHECK(snap.find("strict_parse=true\n") != std::string::npos);

    write(tmp / "bad.conf", "colour = blue\n");
    CHECK(cli({"run", "--config", (tmp / "bad.conf").string(), "--corpus", "x"}).code == kExitMalformed);
  }

  TEST_CASE("import") {
    testutil::TempDir tmp;
    write(tmp / "segs.json", R"({"segments":[
      {"speaker":"spk_1","text":"Do you have a job?","start_ms":0,"end_ms":900},
      {"speaker":"spk_0","text":"No.","start_ms":1000,"end_ms":1200},
      {"speaker":"spk_0","text":"I used to.","start_ms":1300,"end_ms":1500},
      {"speaker":"spk_1","text":"Where?","start_ms":400000,"end_ms":400500},
      {"speaker":"spk_0","text":"At a shop.","start_ms":401000,"end_ms":401500}]})");
    write(tmp / "bounds.json", R"({"boundaries":[{"scenario_id":5,"start_ms":0,"end_ms":300000},
      {"scenario_id":6,"start_ms":300000,"end_ms":600000}]})");
    const auto r = cli({"import", "--segments", (tmp / "segs.json").string(), "--boundaries",
                        (tmp / "bounds.json").string(), "--subject", "X", "--session", "X-1", "--a4", "1", "--merge",
                        "--out", (tmp / "c.json").string()});
    REQUIRE(r.code == kExitOk);
    const Corpus c = load_corpus(tmp / "c.json");
    const auto& d = c.sessions[0].dialogues.at(ScenarioId(5));
    REQUIRE(d.utterances.size() == 2);
    CHECK(d.utterances[0].role == SpeakerRole::Examiner);
    CHECK(d.utterances[1].text == "No. I used to.");
    CHECK(c.sessions[0].dialogues.count(ScenarioId(6)) == 1);
  }
}
