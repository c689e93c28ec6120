#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace affordfit {

enum class ErrorCode {
  SyntaxError,
  SchemaError,
  ReferenceError,
  BindingError,
  ValidationError,
  EmptyCloud,
  NonPositiveDepth,
  DegenerateMesh,
  AntipodalRotations,
  FrameCountMismatch,
  TooFewFrames,
  TooFewSamples,
  NoViews,
  NoVotes,
  NonFiniteLoss,
  InfeasibleSpec,
  EmptyHumanObservation,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so the
/// CLI can report it as machine-readable JSON.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace affordfit
