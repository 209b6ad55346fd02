#include "ctxfuse/error.hpp"

namespace ctxfuse {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyFocal: return "EmptyFocal";
    case ErrorCode::kNotNormalized: return "NotNormalized";
    case ErrorCode::kBadFrame: return "BadFrame";
    case ErrorCode::kFrameMismatch: return "FrameMismatch";
    case ErrorCode::kTotalConflict: return "TotalConflict";
    case ErrorCode::kAllZero: return "AllZero";
    case ErrorCode::kNotNormal: return "NotNormal";
    case ErrorCode::kUnknownLabel: return "UnknownLabel";
    case ErrorCode::kZeroEvidence: return "ZeroEvidence";
    case ErrorCode::kMalformedGraph: return "MalformedGraph";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kTooManyLabelings: return "TooManyLabelings";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kInvariantError: return "InvariantError";
    case ErrorCode::kBadRegex: return "BadRegex";
  }
  return "Unknown";
}

}  // namespace ctxfuse
