#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vsum {

enum class ErrorCode {
  kMissingFile,
  kParseError,
  kDimensionMismatch,
  kCorruptEmbedding,
  kDuplicateVideoId,
  kUnknownVideoId,
  kOverlappingFold,
  kIncompleteFold,
  kIndexOutOfRange,
  kInsufficientMaskableFrames,
  kPlanMismatch,
  kShapeMismatch,
  kConfigMismatch,
  kVersionMismatch,
  kCorruptFile,
  kEmptyTrainSet,
  kDivergenceDetected,
  kFrozenModelViolation,
  kLengthMismatch,
  kEmptyAnnotationSet,
  kMissingOutput,
  kMissingCheckpoint,
  kMissingScores,
  kInvalidArgument,
};

std::string_view error_code_name(ErrorCode code);

// All domain failures are reported through this type; callers switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMissingFile: return "MissingFile";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kCorruptEmbedding: return "CorruptEmbedding";
    case ErrorCode::kDuplicateVideoId: return "DuplicateVideoId";
    case ErrorCode::kUnknownVideoId: return "UnknownVideoId";
    case ErrorCode::kOverlappingFold: return "OverlappingFold";
    case ErrorCode::kIncompleteFold: return "IncompleteFold";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kInsufficientMaskableFrames: return "InsufficientMaskableFrames";
    case ErrorCode::kPlanMismatch: return "PlanMismatch";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kConfigMismatch: return "ConfigMismatch";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kCorruptFile: return "CorruptFile";
    case ErrorCode::kEmptyTrainSet: return "EmptyTrainSet";
    case ErrorCode::kDivergenceDetected: return "DivergenceDetected";
    case ErrorCode::kFrozenModelViolation: return "FrozenModelViolation";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kEmptyAnnotationSet: return "EmptyAnnotationSet";
    case ErrorCode::kMissingOutput: return "MissingOutput";
    case ErrorCode::kMissingCheckpoint: return "MissingCheckpoint";
    case ErrorCode::kMissingScores: return "MissingScores";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace vsum
