#include "affordfit/error.hpp"

namespace affordfit {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::ReferenceError: return "ReferenceError";
    case ErrorCode::BindingError: return "BindingError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::EmptyCloud: return "EmptyCloud";
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::DegenerateMesh: return "DegenerateMesh";
    case ErrorCode::AntipodalRotations: return "AntipodalRotations";
    case ErrorCode::FrameCountMismatch: return "FrameCountMismatch";
    case ErrorCode::TooFewFrames: return "TooFewFrames";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::NoViews: return "NoViews";
    case ErrorCode::NoVotes: return "NoVotes";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::InfeasibleSpec: return "InfeasibleSpec";
    case ErrorCode::EmptyHumanObservation: return "EmptyHumanObservation";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace affordfit
