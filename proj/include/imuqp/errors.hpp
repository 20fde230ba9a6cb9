#pragma once

#include <stdexcept>
#include <string>

namespace imuqp {

enum class Errc {
  PivotBreakdown,
  DimensionMismatch,
  NotSymmetric,
  CapacityExceeded,
  IndexOutOfRange,
  SizeLimit,
  NotPositiveDefinite,
  WindowOutOfRange,
  ParseError,
  InvalidArgument,
  OracleInconsistent,
};

const char* to_string(Errc code) noexcept;

/// Precondition and input errors. Solver outcomes (infeasible, iteration
/// limit, ...) are reported through QpSolution::status instead.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::PivotBreakdown: return "PivotBreakdown";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NotSymmetric: return "NotSymmetric";
    case Errc::CapacityExceeded: return "CapacityExceeded";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::SizeLimit: return "SizeLimit";
    case Errc::NotPositiveDefinite: return "NotPositiveDefinite";
    case Errc::WindowOutOfRange: return "WindowOutOfRange";
    case Errc::ParseError: return "ParseError";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::OracleInconsistent: return "OracleInconsistent";
  }
  return "Unknown";
}

namespace detail {
inline void require_dims(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::DimensionMismatch, what);
}
}  // namespace detail

}  // namespace imuqp
