#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace randpress {

// Stable machine-readable error taxonomy. The string names are part of the
// CLI contract (they appear in the error JSON), do not rename them.
enum class ErrorCode {
  kConfiguration,
  kValidation,
  kDomain,
  kNumeric,
  kSingularity,
  kOutsideRepeller,
  kNotUniformlyExpanding,
  kUnsupportedRepresentation,
  kResource,
  kNoZero,
  kNormalization,
  kNotMeanExpanding,
  kDepthInsufficient,
  kPathTooShort,
  kHypothesisViolation,
  kNonConvex,
  kConvergence,
  kInternal,
};

std::string_view code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::vector<std::string> details = {})
      : std::runtime_error(message), code_(code), details_(std::move(details)) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return code_name(code_); }
  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  ErrorCode code_;
  std::vector<std::string> details_;
};

}  // namespace randpress
