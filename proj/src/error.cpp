#include "sldx/error.hpp"

namespace sldx {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedFile: return "MalformedFile";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::DuplicateSessionId: return "DuplicateSessionId";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::UnknownFeature: return "UnknownFeature";
    case ErrorCode::UnrecognizedTag: return "UnrecognizedTag";
    case ErrorCode::SpeakerCountUnsupported: return "SpeakerCountUnsupported";
    case ErrorCode::EmptyTranscript: return "EmptyTranscript";
    case ErrorCode::OverlappingBoundaries: return "OverlappingBoundaries";
    case ErrorCode::UnknownRolePresent: return "UnknownRolePresent";
    case ErrorCode::KnowledgeMissing: return "KnowledgeMissing";
    case ErrorCode::BudgetTooSmall: return "BudgetTooSmall";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::CredentialMissing: return "CredentialMissing";
    case ErrorCode::OfflineMode: return "OfflineMode";
    case ErrorCode::TransportFailure: return "TransportFailure";
    case ErrorCode::ScriptExhausted: return "ScriptExhausted";
    case ErrorCode::NonTransientApiError: return "NonTransientApiError";
    case ErrorCode::CacheCorrupt: return "CacheCorrupt";
    case ErrorCode::ReplayMiss: return "ReplayMiss";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::MissingFeatures: return "MissingFeatures";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::ExcludedScenario: return "ExcludedScenario";
    case ErrorCode::UndetectableFeatureRequested: return "UndetectableFeatureRequested";
    case ErrorCode::UnknownFixture: return "UnknownFixture";
    case ErrorCode::MissingGroundTruth: return "MissingGroundTruth";
    case ErrorCode::NoFeatureData: return "NoFeatureData";
    case ErrorCode::RunNotFound: return "RunNotFound";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace sldx
