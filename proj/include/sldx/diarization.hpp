#pragma once

// Import of diarization vendor output: role mapping and scenario segmentation.

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sldx/corpus.hpp"

namespace sldx {

struct RawSegment {
  std::string speaker_tag;
  std::string text;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
};

struct ScenarioBoundary {
  ScenarioId scenario{3};
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
};

enum class RoleMethod { Explicit, InterrogativeHeuristic, ManualOverride };

struct RoleMap {
  std::map<std::string, SpeakerRole> roles;
  RoleMethod method = RoleMethod::Explicit;

  /// Tags not in the map are Unknown.
  SpeakerRole role_of(const std::string& tag) const;
};

/// Segments whose tags are already "examiner"/"patient" (any case).
/// Throws Error(UnrecognizedTag) for anything else.
std::vector<Utterance> import_role_labeled(std::span<const RawSegment> segments);

/// Two generic speaker tags: the one asking proportionally more questions
/// (segments containing '?') is the examiner. Exact ties go to the tag that
/// speaks first.
RoleMap assign_roles(std::span<const RawSegment> segments);

/// Explicit mapping, e.g. from an operator override.
RoleMap manual_roles(const std::string& examiner_tag, const std::string& patient_tag);

struct Segmentation {
  std::map<ScenarioId, ScenarioDialogue> dialogues;
  std::size_t dropped_count = 0;  // outside every window
  std::size_t unknown_count = 0;  // speaker tag maps to Unknown; excluded
};

/// Half-open windows [start, end): a segment belongs to the window holding its
/// start_ms. Boundaries must be sorted and non-overlapping
/// (Error(OverlappingBoundaries) otherwise).
Segmentation segment_by_boundaries(std::span<const RawSegment> segments, const RoleMap& roles,
                                   std::span<const ScenarioBoundary> bounds);

/// Joins consecutive same-role utterances with a single space. Idempotent.
std::vector<Utterance> merge_adjacent(const std::vector<Utterance>& utterances);

// Vendor file readers. Segment files: {"segments": [{"speaker" | "speaker_tag",
// "text", "start_ms", "end_ms"}]}. Boundary files: {"boundaries":
// [{"scenario_id", "start_ms", "end_ms"}]}. Errors: MalformedFile / SchemaViolation.
std::vector<RawSegment> read_segments(const std::filesystem::path& path);
std::vector<ScenarioBoundary> read_boundaries(const std::filesystem::path& path);

}  // namespace sldx
