#pragma once

#include <stdexcept>
#include <string>

namespace nifb {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kNonSymmetric,
  kNotPSD,
  kNotPD,
  kSingularAtS,
  kIllPosed,
  kNotMinimal,
  kNotStrictlyProper,
  kJordanBlockTooLarge,
  kIllConditionedTransform,
  kNumericalBreakdown,
  kNotAPole,
  kNotSimple,
  kSingularInner,
  kG2Zero,
  kLimitDivergent,
  kSingularBoundarySystem,
  kNotARoot,
  kInsufficientRange,
  kParseError,
};

const char* to_string(ErrorCode code);

// All library failures are reported through this exception. The code lets
// callers (and the CLI exit-code mapping) branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nifb
