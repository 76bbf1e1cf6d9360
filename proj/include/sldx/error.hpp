#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sldx {

enum class ErrorCode {
  // corpus
  MalformedFile,
  SchemaViolation,
  DuplicateSessionId,
  OutOfRange,
  UnknownFeature,
  // diarization
  UnrecognizedTag,
  SpeakerCountUnsupported,
  EmptyTranscript,
  OverlappingBoundaries,
  // prompting
  UnknownRolePresent,
  KnowledgeMissing,
  BudgetTooSmall,
  // llm gateway
  InvalidConfig,
  CredentialMissing,
  OfflineMode,
  TransportFailure,
  ScriptExhausted,
  NonTransientApiError,
  CacheCorrupt,
  ReplayMiss,
  // classifier / analytics
  EmptyInput,
  MissingFeatures,
  LengthMismatch,
  TooFewRows,
  ExcludedScenario,
  // oracle / fixtures / cli
  UndetectableFeatureRequested,
  UnknownFixture,
  MissingGroundTruth,
  NoFeatureData,
  RunNotFound,
  IoError,
};

std::string_view error_code_name(ErrorCode code);

/// Single exception type for every domain error; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sldx
