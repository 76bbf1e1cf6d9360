#include "sldx/fixtures.hpp"

#include <cstdlib>

#include "sldx/error.hpp"

#ifndef SLDX_DEFAULT_DATA_DIR
#define SLDX_DEFAULT_DATA_DIR "."
#endif

namespace sldx {

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("SLDX_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return SLDX_DEFAULT_DATA_DIR;
}

CaseStudyFixture load_fixture(std::string_view name) { return load_fixture(name, data_dir()); }

CaseStudyFixture load_fixture(std::string_view name, const std::filesystem::path& root) {
  CaseStudyFixture fx;
  if (name == "table5") {
    fx.source = FixtureSource::Table5;
    fx.annotated_features = {FeatureId::F1, FeatureId::F2, FeatureId::F3, FeatureId::F9, FeatureId::F10};
  } else if (name == "table6") {
    fx.source = FixtureSource::Table6;
    fx.annotated_features = {FeatureId::F2, FeatureId::F6, FeatureId::F10};
  } else {
    throw Error(ErrorCode::UnknownFixture, std::string(name));
  }
  fx.corpus_path = root / "fixtures" / (std::string(name) + ".json");
  fx.script_path = root / "fixtures" / (std::string(name) + "_script.json");
  Corpus corpus = load_corpus(fx.corpus_path);
  if (corpus.sessions.size() != 1 || corpus.sessions[0].dialogues.size() != 1) {
    throw Error(ErrorCode::SchemaViolation, fx.corpus_path.string() + ": expected one session with one scenario");
  }
  fx.session = std::move(corpus.sessions[0]);
  fx.dialogue = fx.session.dialogues.begin()->second;
  return fx;
}

}  // namespace sldx
