#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dpca {

/// Machine-readable failure categories. The CLI prints `code_name()` verbatim.
enum class ErrorCode {
  InvalidArgument,
  UncoveredNode,
  NotPerfectOrder,
  RedundantClique,
  InfeasibleShape,
  SingularLocalCovariance,
  NotSymmetric,
  BadBracket,
  NoNullVector,
  DimensionMismatch,
  LocalityViolation,
  ParseError,
  IoError,
};

std::string_view code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dpca
