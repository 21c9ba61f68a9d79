#include "dpca/error.hpp"

namespace dpca {

std::string_view code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UncoveredNode: return "UncoveredNode";
    case ErrorCode::NotPerfectOrder: return "NotPerfectOrder";
    case ErrorCode::RedundantClique: return "RedundantClique";
    case ErrorCode::InfeasibleShape: return "InfeasibleShape";
    case ErrorCode::SingularLocalCovariance: return "SingularLocalCovariance";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::BadBracket: return "BadBracket";
    case ErrorCode::NoNullVector: return "NoNullVector";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::LocalityViolation: return "LocalityViolation";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace dpca
