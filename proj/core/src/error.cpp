#include "tariffopt/error.hpp"

namespace tariffopt {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::InvalidRecord: return "InvalidRecord";
    case ErrorCode::TimestampGap: return "TimestampGap";
    case ErrorCode::NonMonotoneTime: return "NonMonotoneTime";
    case ErrorCode::MisalignedSeries: return "MisalignedSeries";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::DegenerateKnots: return "DegenerateKnots";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::EmptyComparisonSet: return "EmptyComparisonSet";
    case ErrorCode::NoPathInRange: return "NoPathInRange";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::ZeroBandwidth: return "ZeroBandwidth";
    case ErrorCode::NonConcave: return "NonConcave";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::Unbounded: return "Unbounded";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace tariffopt
