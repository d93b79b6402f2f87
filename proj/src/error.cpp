#include "randpress/error.hpp"

namespace randpress {

std::string_view code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kConfiguration: return "configuration";
    case ErrorCode::kValidation: return "validation";
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kNumeric: return "numeric";
    case ErrorCode::kSingularity: return "singularity";
    case ErrorCode::kOutsideRepeller: return "outside_repeller";
    case ErrorCode::kNotUniformlyExpanding: return "not_uniformly_expanding";
    case ErrorCode::kUnsupportedRepresentation: return "unsupported_representation";
    case ErrorCode::kResource: return "resource";
    case ErrorCode::kNoZero: return "no_zero";
    case ErrorCode::kNormalization: return "normalization";
    case ErrorCode::kNotMeanExpanding: return "not_mean_expanding";
    case ErrorCode::kDepthInsufficient: return "depth_insufficient";
    case ErrorCode::kPathTooShort: return "path_too_short";
    case ErrorCode::kHypothesisViolation: return "hypothesis_violation";
    case ErrorCode::kNonConvex: return "non_convex";
    case ErrorCode::kConvergence: return "convergence";
    case ErrorCode::kInternal: return "internal";
  }
  return "unknown";
}

}  // namespace randpress
