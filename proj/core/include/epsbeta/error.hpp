#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace epsbeta {

enum class ErrorCode {
  InvalidArgument,
  CubeOutsideGrid,
  ProfileMismatch,
  LedgerConflict,
  InvalidDensity,
  ExpressionSyntax,
  EmptyInterface,
  ConditionViolated,
  FlatnessFailure,
  NoCandidateCube,
  StripSelectionFailure,
  EpsilonTooLarge,
  BisectionBracketFailure,
  DisconnectedChamber,
  BallPackingFailure,
  BallNotBiphase,
  NoValidRadius,
  CasePartitionFailure,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the named codes above;
/// the CLI reports the name verbatim.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const { return to_string(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

/// Short %g rendering for error messages.
std::string num(double v);

}  // namespace epsbeta
