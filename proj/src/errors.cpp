#include "margreg/errors.hpp"

#include <cstdio>

namespace margreg {

ErrorKind kind_of(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ZeroColumn:
    case ErrorCode::NearSingular:
    case ErrorCode::DiagonalMatrix:
    case ErrorCode::NoValidRow:
    case ErrorCode::Overflow:
    case ErrorCode::AllOverflow:
    case ErrorCode::DegenerateRegression:
      return ErrorKind::Numerical;
    default:
      return ErrorKind::Validation;
  }
}

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Parse: return "ParseError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotStandardized: return "NotStandardized";
    case ErrorCode::ZeroColumn: return "ZeroColumn";
    case ErrorCode::EmptySupport: return "EmptySupport";
    case ErrorCode::FullSupport: return "FullSupport";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NearSingular: return "NearSingular";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::KOutOfRange: return "KOutOfRange";
    case ErrorCode::NotUnitDiagonal: return "NotUnitDiagonal";
    case ErrorCode::DiagonalMatrix: return "DiagonalMatrix";
    case ErrorCode::NoValidRow: return "NoValidRow";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::AllOverflow: return "AllOverflow";
    case ErrorCode::DegenerateRegression: return "DegenerateRegression";
    case ErrorCode::Config: return "ConfigError";
    case ErrorCode::Io: return "IoError";
  }
  return "Unknown";
}

namespace {
std::string near_singular_message(double lambda_min) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "matrix is near singular (lambda_min = %.6g)",
                lambda_min);
  return buf;
}
}  // namespace

NearSingularError::NearSingularError(double lambda_min)
    : Error(ErrorCode::NearSingular, near_singular_message(lambda_min)),
      lambda_min_(lambda_min) {}

}  // namespace margreg
