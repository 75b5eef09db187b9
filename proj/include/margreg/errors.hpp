#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace margreg {

enum class ErrorCode {
  InvalidArgument,
  Parse,
  DimensionMismatch,
  NotStandardized,
  ZeroColumn,
  EmptySupport,
  FullSupport,
  NotSymmetric,
  NearSingular,
  IndexOutOfRange,
  KOutOfRange,
  NotUnitDiagonal,
  DiagonalMatrix,
  NoValidRow,
  Overflow,
  AllOverflow,
  DegenerateRegression,
  Config,
  Io,
};

// Validation errors are caller mistakes (bad input, bad config); numerical
// errors mean the input was well-formed but the math cannot proceed.
enum class ErrorKind { Validation, Numerical };

ErrorKind kind_of(ErrorCode code) noexcept;
std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorKind kind() const noexcept { return kind_of(code_); }

 private:
  ErrorCode code_;
};

/// Thrown by solve_spd and everything built on it; carries the offending
/// minimum eigenvalue so callers can report Condition E failure.
class NearSingularError : public Error {
 public:
  explicit NearSingularError(double lambda_min);
  double lambda_min() const noexcept { return lambda_min_; }

 private:
  double lambda_min_;
};

}  // namespace margreg
