#include "nifb/error.hpp"

namespace nifb {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNonSymmetric: return "NonSymmetric";
    case ErrorCode::kNotPSD: return "NotPSD";
    case ErrorCode::kNotPD: return "NotPD";
    case ErrorCode::kSingularAtS: return "SingularAtS";
    case ErrorCode::kIllPosed: return "IllPosed";
    case ErrorCode::kNotMinimal: return "NotMinimal";
    case ErrorCode::kNotStrictlyProper: return "NotStrictlyProper";
    case ErrorCode::kJordanBlockTooLarge: return "JordanBlockTooLarge";
    case ErrorCode::kIllConditionedTransform: return "IllConditionedTransform";
    case ErrorCode::kNumericalBreakdown: return "NumericalBreakdown";
    case ErrorCode::kNotAPole: return "NotAPole";
    case ErrorCode::kNotSimple: return "NotSimple";
    case ErrorCode::kSingularInner: return "SingularInner";
    case ErrorCode::kG2Zero: return "G2Zero";
    case ErrorCode::kLimitDivergent: return "LimitDivergent";
    case ErrorCode::kSingularBoundarySystem: return "SingularBoundarySystem";
    case ErrorCode::kNotARoot: return "NotARoot";
    case ErrorCode::kInsufficientRange: return "InsufficientRange";
    case ErrorCode::kParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace nifb
