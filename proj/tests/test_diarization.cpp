#include <doctest.h>

#include <fstream>

#include "sldx/diarization.hpp"
#include "sldx/error.hpp"
#include "test_util.hpp"

using namespace sldx;

namespace {

RawSegment seg(std::string tag, std::string text, std::int64_t start_ms = 0, std::int64_t end_ms = 0) {
  return RawSegment{std::move(tag), std::move(text), start_ms, end_ms == 0 ? start_ms + 1000 : end_ms};
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::IoError;
}

}  // namespace

TEST_SUITE("diarization") {
  TEST_CASE("role-labeled import") {
    std::vector<RawSegment> s{seg("examiner", "Okay. So, do you have some friends?"),
                              seg("Patient", "Uh, do I have some friends?", 2000)};
    const auto u = import_role_labeled(s);
    REQUIRE(u.size() == 2);
    CHECK(u[0].role == SpeakerRole::Examiner);
    CHECK(u[1].role == SpeakerRole::Patient);
    CHECK(u[1].index == 1);
    CHECK(u[1].text == "Uh, do I have some friends?");
    CHECK(import_role_labeled({}).empty());
    std::vector<RawSegment> bad{seg("spk_0", "hi")};
    CHECK(code_of([&] { import_role_labeled(bad); }) == ErrorCode::UnrecognizedTag);
  }

  TEST_CASE("interrogative heuristic") {
    std::vector<RawSegment> s;
    for (int i = 0; i < 6; ++i) {
      s.push_back(seg("B", "I see.", i * 2000));
      s.push_back(seg("A", i < 5 ? "Why is that?" : "Okay.", i * 2000 + 1000));
    }
    const RoleMap m = assign_roles(s);
    CHECK(m.role_of("A") == SpeakerRole::Examiner);
    CHECK(m.role_of("B") == SpeakerRole::Patient);
    CHECK(m.role_of("C") == SpeakerRole::Unknown);
    CHECK(m.method == RoleMethod::InterrogativeHeuristic);
  }

  TEST_CASE("tie goes to first speaker") {
    std::vector<RawSegment> s{seg("B", "What?", 0), seg("A", "Where?", 1000), seg("B", "Fine.", 2000),
                              seg("A", "Sure.", 3000)};
    const RoleMap m = assign_roles(s);
    CHECK(m.role_of("B") == SpeakerRole::Examiner);
    CHECK(m.role_of("A") == SpeakerRole::Patient);
  }

  TEST_CASE("speaker count") {
    std::vector<RawSegment> three{seg("A", "a?"), seg("B", "b"), seg("C", "c")};
    CHECK(code_of([&] { assign_roles(three); }) == ErrorCode::SpeakerCountUnsupported);
    CHECK(code_of([] { assign_roles({}); }) == ErrorCode::EmptyTranscript);
  }

  TEST_CASE("window containment") {
    const RoleMap roles = manual_roles("A", "B");
    std::vector<RawSegment> s{seg("A", "one?", 0), seg("B", "two", 10'000), seg("A", "three?", 400'000),
                              seg("B", "four", 410'000)};
    std::vector<ScenarioBoundary> b{{ScenarioId(3), 0, 300'000}, {ScenarioId(4), 300'000, 600'000}};
    const Segmentation out = segment_by_boundaries(s, roles, b);
    CHECK(out.dialogues.at(ScenarioId(3)).utterances.size() == 2);
    CHECK(out.dialogues.at(ScenarioId(4)).utterances.size() == 2);
    CHECK(out.dropped_count == 0);
  }

  TEST_CASE("half-open windows and dropping") {
    const RoleMap roles = manual_roles("A", "B");
    std::vector<RawSegment> s{seg("A", "q?", 299'999), seg("B", "a", 300'000), seg("B", "late", 700'000),
                              seg("Z", "who", 100)};
    std::vector<ScenarioBoundary> b{{ScenarioId(3), 0, 300'000}, {ScenarioId(4), 300'000, 600'000}};
    const Segmentation out = segment_by_boundaries(s, roles, b);
    CHECK(out.dialogues.at(ScenarioId(3)).utterances.size() == 1);
    CHECK(out.dialogues.at(ScenarioId(4)).utterances.front().text == "a");
    CHECK(out.dropped_count == 1);
    CHECK(out.unknown_count == 1);
  }

  TEST_CASE("overlapping boundaries") {
    std::vector<ScenarioBoundary> b{{ScenarioId(3), 0, 300'000}, {ScenarioId(4), 200'000, 600'000}};
    CHECK(code_of([&] { segment_by_boundaries({}, manual_roles("A", "B"), b); }) ==
          ErrorCode::OverlappingBoundaries);
  }

  TEST_CASE("merge adjacent") {
    const auto d = testutil::dialogue(3, {{'E', "What"}, {'E', "do they like?"}});
    const auto merged = merge_adjacent(d.utterances);
    REQUIRE(merged.size() == 1);
    CHECK(merged[0].text == "What do they like?");
    const auto alt = testutil::dialogue(3, {{'E', "a"}, {'P', "b"}, {'E', "c"}});
    CHECK(merge_adjacent(alt.utterances) == alt.utterances);
    CHECK(merge_adjacent({}).empty());
    CHECK(merge_adjacent(merged) == merged);
  }

  TEST_CASE("vendor file readers") {
    testutil::TempDir tmp;
    std::ofstream(tmp / "s.json") << R"({"segments":[{"speaker":"A","text":"hi?","start_ms":0,"end_ms":500},
      {"speaker_tag":"B","text":"yo","start_ms":600,"end_ms":900}]})";
    std::ofstream(tmp / "b.json") << R"({"boundaries":[{"scenario_id":3,"start_ms":0,"end_ms":1000}]})";
    std::ofstream(tmp / "bad.json") << R"({"segments":[{"text":"x"}]})";
    const auto segs = read_segments(tmp / "s.json");
    REQUIRE(segs.size() == 2);
    CHECK(segs[1].speaker_tag == "B");
    CHECK(read_boundaries(tmp / "b.json").front().scenario == ScenarioId(3));
    CHECK(code_of([&] { read_segments(tmp / "bad.json"); }) == ErrorCode::SchemaViolation);
  }
}
