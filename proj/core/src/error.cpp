#include "epsbeta/error.hpp"

#include <cstdio>

namespace epsbeta {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::CubeOutsideGrid: return "CubeOutsideGrid";
    case ErrorCode::ProfileMismatch: return "ProfileMismatch";
    case ErrorCode::LedgerConflict: return "LedgerConflict";
    case ErrorCode::InvalidDensity: return "InvalidDensity";
    case ErrorCode::ExpressionSyntax: return "ExpressionSyntax";
    case ErrorCode::EmptyInterface: return "EmptyInterface";
    case ErrorCode::ConditionViolated: return "ConditionViolated";
    case ErrorCode::FlatnessFailure: return "FlatnessFailure";
    case ErrorCode::NoCandidateCube: return "NoCandidateCube";
    case ErrorCode::StripSelectionFailure: return "StripSelectionFailure";
    case ErrorCode::EpsilonTooLarge: return "EpsilonTooLarge";
    case ErrorCode::BisectionBracketFailure: return "BisectionBracketFailure";
    case ErrorCode::DisconnectedChamber: return "DisconnectedChamber";
    case ErrorCode::BallPackingFailure: return "BallPackingFailure";
    case ErrorCode::BallNotBiphase: return "BallNotBiphase";
    case ErrorCode::NoValidRadius: return "NoValidRadius";
    case ErrorCode::CasePartitionFailure: return "CasePartitionFailure";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace epsbeta
