#pragma once

// Domain model for examiner/patient interview transcripts and the on-disk
// corpus schema.

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sldx {

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

inline constexpr int kScenarioCount = 15;

/// One of the 15 interview scenarios, identified by its 1-based number.
class ScenarioId {
 public:
  /// Throws Error(OutOfRange) unless 1 <= id <= 15.
  explicit ScenarioId(int id);

  int value() const noexcept { return id_; }
  std::string_view name() const noexcept;
  /// Only dialogic scenarios take part in analysis.
  bool included() const noexcept;

  auto operator<=>(const ScenarioId&) const = default;

 private:
  int id_;
};

/// The 11 scenario ids used by every analysis, ascending.
const std::vector<ScenarioId>& included_scenarios();
const std::vector<ScenarioId>& all_scenarios();

// ---------------------------------------------------------------------------
// Speakers and utterances
// ---------------------------------------------------------------------------

enum class SpeakerRole { Examiner, Patient, Unknown };

std::string_view role_name(SpeakerRole role);  // "examiner" / "patient" / "unknown"

struct Utterance {
  SpeakerRole role = SpeakerRole::Unknown;
  std::string text;
  std::optional<std::int64_t> start_ms;
  std::optional<std::int64_t> end_ms;
  std::size_t index = 0;

  bool operator==(const Utterance&) const = default;
};

struct ScenarioDialogue {
  ScenarioId scenario{3};
  std::vector<Utterance> utterances;

  /// True unless the dialogue has at least one Examiner and one Patient turn.
  bool degenerate() const;
  bool has_unknown_roles() const;

  bool operator==(const ScenarioDialogue&) const = default;
};

/// Reassigns utterance indices to 0..n-1.
void reindex(std::vector<Utterance>& utterances);

struct SessionTranscript {
  std::string subject_id;
  std::string session_id;
  std::optional<int> a4_true;
  std::map<ScenarioId, ScenarioDialogue> dialogues;

  bool operator==(const SessionTranscript&) const = default;
};

// ---------------------------------------------------------------------------
// Features and labels
// ---------------------------------------------------------------------------

inline constexpr int kFeatureCount = 10;

enum class FeatureId : std::uint8_t { F1, F2, F3, F4, F5, F6, F7, F8, F9, F10 };

inline constexpr std::array<FeatureId, kFeatureCount> kAllFeatures = {
    FeatureId::F1, FeatureId::F2, FeatureId::F3, FeatureId::F4, FeatureId::F5,
    FeatureId::F6, FeatureId::F7, FeatureId::F8, FeatureId::F9, FeatureId::F10};

constexpr int feature_index(FeatureId f) noexcept { return static_cast<int>(f); }
std::string_view feature_code(FeatureId f);  // "F1".."F10"
std::string_view feature_name(FeatureId f);  // e.g. "Echoic Repetition"

/// Case-insensitive, whitespace-normalized match on "F1".."F10" or a
/// canonical feature name. Throws Error(UnknownFeature) otherwise.
FeatureId canonical_feature(std::string_view token);
std::optional<FeatureId> try_canonical_feature(std::string_view token);

/// Set of features stored as a 10-bit mask; iteration is ascending F1..F10.
class FeatureSet {
 public:
  constexpr FeatureSet() = default;
  FeatureSet(std::initializer_list<FeatureId> features);
  static FeatureSet from_mask(std::uint16_t mask);

  std::uint16_t mask() const noexcept { return mask_; }
  bool contains(FeatureId f) const noexcept { return (mask_ >> feature_index(f)) & 1U; }
  void insert(FeatureId f) noexcept { mask_ |= static_cast<std::uint16_t>(1U << feature_index(f)); }
  void erase(FeatureId f) noexcept { mask_ &= static_cast<std::uint16_t>(~(1U << feature_index(f))); }
  bool empty() const noexcept { return mask_ == 0; }
  int size() const noexcept;
  std::vector<FeatureId> members() const;
  bool is_subset_of(const FeatureSet& other) const noexcept {
    return (mask_ & ~other.mask_) == 0;
  }

  FeatureSet operator|(const FeatureSet& o) const noexcept { return from_mask(mask_ | o.mask_); }
  FeatureSet operator&(const FeatureSet& o) const noexcept { return from_mask(mask_ & o.mask_); }
  FeatureSet& operator|=(const FeatureSet& o) noexcept {
    mask_ |= o.mask_;
    return *this;
  }
  bool operator==(const FeatureSet&) const = default;

  /// "{F1,F9}"
  std::string to_string() const;
  /// ["F1","F9"] as plain codes.
  std::vector<std::string> codes() const;

 private:
  std::uint16_t mask_ = 0;
};

enum class BinaryLabel : std::uint8_t { Zero = 0, One = 1 };

constexpr int to_int(BinaryLabel l) noexcept { return static_cast<int>(l); }
constexpr BinaryLabel label_from_bool(bool b) noexcept {
  return b ? BinaryLabel::One : BinaryLabel::Zero;
}

/// 1 iff a4 > 0. Throws Error(OutOfRange) for values outside 0..3.
BinaryLabel binarize_a4(int a4);

// ---------------------------------------------------------------------------
// Validation and loading
// ---------------------------------------------------------------------------

enum class Severity { Error, Warning };

struct Violation {
  Severity severity = Severity::Error;
  std::string session_id;
  std::string location;  // field path, e.g. "scenarios[3].utterances[2]"
  std::string message;
};

/// Checks the type invariants. Degenerate (single-speaker) dialogues are
/// reported as warnings; everything else is an error.
std::vector<Violation> validate_session(const SessionTranscript& s);

struct LoadOptions {
  /// Reject unknown JSON fields instead of warning about them.
  bool strict_fields = false;
};

struct Corpus {
  std::vector<SessionTranscript> sessions;
  std::vector<std::string> warnings;
};

/// Structural parse only: syntax (MalformedFile), field types and required
/// fields (SchemaViolation), duplicate ids (DuplicateSessionId).
Corpus parse_corpus(std::string_view json_text, const LoadOptions& opts = {});

/// parse_corpus + validate_session on every session; any error-severity
/// violation raises SchemaViolation naming the session and field path.
Corpus load_corpus(const std::filesystem::path& path, const LoadOptions& opts = {});
Corpus load_corpus_unvalidated(const std::filesystem::path& path, const LoadOptions& opts = {});

std::string serialize_corpus(const std::vector<SessionTranscript>& sessions);

}  // namespace sldx
