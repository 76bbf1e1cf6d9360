#pragma once

// Case-study dialogues shipped under fixtures/, with their annotated features.

#include <filesystem>
#include <string_view>

#include "sldx/corpus.hpp"

namespace sldx {

enum class FixtureSource { Table5, Table6 };

struct CaseStudyFixture {
  SessionTranscript session;
  ScenarioDialogue dialogue;
  FeatureSet annotated_features;
  FixtureSource source = FixtureSource::Table5;
  std::filesystem::path corpus_path;
  std::filesystem::path script_path;  // scripted answers listing the annotated features
};

/// Repository root holding fixtures/ and lexicons/. SLDX_DATA_DIR overrides
/// the build-time default.
std::filesystem::path data_dir();

/// name is "table5" or "table6"; anything else is Error(UnknownFixture).
CaseStudyFixture load_fixture(std::string_view name);
CaseStudyFixture load_fixture(std::string_view name, const std::filesystem::path& root);

}  // namespace sldx
