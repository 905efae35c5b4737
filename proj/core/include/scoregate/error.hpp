#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scoregate {

// Every failure surfaced by the library carries one of these codes so that
// the serving layer and the CLI can map it onto a status without string
// matching.
enum class ErrorCode {
  // validation of incoming events
  MissingTenant,
  NonFiniteFeature,
  EmptyFeatureVector,
  ParseError,
  // domain-value validation
  InvalidScore,
  InvalidArgument,
  InvalidTable,
  LengthMismatch,
  // fitting
  EmptySampleSet,
  LevelsNotSorted,
  DegenerateLabels,
  // routing / deployment
  UnknownPredictor,
  DuplicatePredictorId,
  UnknownQuantileTable,
  NoMatchingRule,
  // serving
  BackendUnavailable,
  NotReady,
  WarmupTimeout,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

// True for codes that describe bad input rather than a runtime failure.
bool is_validation_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace scoregate
