#include "scoregate/error.hpp"

namespace scoregate {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MissingTenant: return "MissingTenant";
    case ErrorCode::NonFiniteFeature: return "NonFiniteFeature";
    case ErrorCode::EmptyFeatureVector: return "EmptyFeatureVector";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidScore: return "InvalidScore";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidTable: return "InvalidTable";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptySampleSet: return "EmptySampleSet";
    case ErrorCode::LevelsNotSorted: return "LevelsNotSorted";
    case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    case ErrorCode::UnknownPredictor: return "UnknownPredictor";
    case ErrorCode::DuplicatePredictorId: return "DuplicatePredictorId";
    case ErrorCode::UnknownQuantileTable: return "UnknownQuantileTable";
    case ErrorCode::NoMatchingRule: return "NoMatchingRule";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::NotReady: return "NotReady";
    case ErrorCode::WarmupTimeout: return "WarmupTimeout";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

bool is_validation_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::BackendUnavailable:
    case ErrorCode::NotReady:
    case ErrorCode::WarmupTimeout:
    case ErrorCode::Io:
    case ErrorCode::NoMatchingRule:
      return false;
    default:
      return true;
  }
}

}  // namespace scoregate
