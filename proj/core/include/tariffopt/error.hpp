#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tariffopt {

enum class ErrorCode {
  MissingColumn,
  InvalidRecord,
  TimestampGap,
  NonMonotoneTime,
  MisalignedSeries,
  InvalidConfig,
  InsufficientHistory,
  DegenerateKnots,
  RankDeficient,
  SchemaMismatch,
  EmptyComparisonSet,
  NoPathInRange,
  LengthMismatch,
  SolverFailure,
  ZeroBandwidth,
  NonConcave,
  Infeasible,
  Unbounded,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers (and the CLI) can dispatch on it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tariffopt
