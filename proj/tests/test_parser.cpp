#include <doctest.h>

#include "parser_properties.hpp"
#include "sldx/response_parser.hpp"

using namespace sldx;

TEST_SUITE("parser") {
  TEST_CASE("verdict examples") {
    CHECK(parse_verdict("Yes").value == VerdictValue::Affirmative);
    CHECK(parse_verdict("No.").value == VerdictValue::Negative);
    CHECK(parse_verdict("Yes — the patient shows echolalia.").value == VerdictValue::Affirmative);
    CHECK(parse_verdict("Yes — the patient shows echolalia.", true).value == VerdictValue::Indeterminate);
    CHECK(parse_verdict("").value == VerdictValue::Indeterminate);
    CHECK(parse_verdict("Possibly.").value == VerdictValue::Indeterminate);
    CHECK(parse_verdict("The nose knows").value == VerdictValue::Indeterminate);
    const Verdict v = parse_verdict("  Answer: NO, not really");
    CHECK(v.value == VerdictValue::Negative);
    REQUIRE(v.evidence);
    CHECK(v.evidence->begin == 10);
    CHECK(v.evidence->end == 12);
  }

  TEST_CASE("yes in all case and whitespace combinations") {
    for (const char* word : {"yes", "Yes", "YES", "yEs"}) {
      for (const char* pad : {"", " \t\n"}) {
        const std::string text = std::string(pad) + word + pad;
        CHECK(parse_verdict(text).value == VerdictValue::Affirmative);
        CHECK(parse_verdict(text, true).value == VerdictValue::Affirmative);
      }
    }
  }

  TEST_CASE("feature examples") {
    const FeatureParse a = parse_features("Observed features: F1 (Echoic Repetition), F9.");
    CHECK(a.features == FeatureSet{FeatureId::F1, FeatureId::F9});
    CHECK(a.warnings.empty());

    const FeatureParse b = parse_features("Echoic Repetition and Clichéd Verbal Substitutions are present.");
    CHECK(b.features == FeatureSet{FeatureId::F1, FeatureId::F10});
    CHECK(parse_features("cliched verbal substitutions").features == FeatureSet{FeatureId::F10});

    const FeatureParse c = parse_features("No evidence of F3. F6 is present.");
    CHECK(c.features == FeatureSet{FeatureId::F6});
    REQUIRE(c.warnings.size() == 1);
    CHECK(c.warnings[0] == "negated mention: F3");

    const FeatureParse d = parse_features("F2, F12 and F0.");
    CHECK(d.features == FeatureSet{FeatureId::F2});
    CHECK(d.warnings.size() == 2);

    CHECK(parse_features("None").features.empty());
    CHECK(parse_features("").features.empty());
    CHECK(parse_features("F10").features == FeatureSet{FeatureId::F10});
    CHECK(parse_features("Possibly F4.").features == FeatureSet{FeatureId::F4});
  }

  TEST_CASE("sentence splitting") {
    CHECK(sentence_split("A. B? C") == std::vector<std::string>{"A.", "B?", "C"});
    CHECK(sentence_split("").empty());
    CHECK(sentence_split("F1, F2 seen. Not F3.").size() == 2);
    CHECK(sentence_split("Version 1.5 is fine.").size() == 1);
    const auto spans = sentence_spans("A.  B");
    REQUIRE(spans.size() == 2);
    CHECK(spans[1].begin == 4);
  }

  TEST_CASE("generated verdict variants") {
    const props::Tally t = props::verdict_properties(600, 11);
    CHECK(t.checked >= 500);
    CHECK_MESSAGE(t.violations == 0, t.first_failure);
  }

  TEST_CASE("generated negation variants") {
    const props::Tally t = props::feature_properties(600, 12);
    CHECK(t.checked >= 500);
    CHECK_MESSAGE(t.violations == 0, t.first_failure);
  }
}
