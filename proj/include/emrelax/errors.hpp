#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace emrelax {

/// Failure categories raised by the solvers and the experiment harness.
enum class ErrorKind {
  InvalidArgument,
  NonZeroMeanRhs,
  NoConvergence,
  NegativeDensityIterate,
  NonPositiveDensity,
  CflViolation,
  ConstraintDrift,
  GridMismatch,
  DegenerateFit,
  Io,
};

inline std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NonZeroMeanRhs: return "NonZeroMeanRhs";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NegativeDensityIterate: return "NegativeDensityIterate";
    case ErrorKind::NonPositiveDensity: return "NonPositiveDensity";
    case ErrorKind::CflViolation: return "CflViolation";
    case ErrorKind::ConstraintDrift: return "ConstraintDrift";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::DegenerateFit: return "DegenerateFit";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorKind::InvalidArgument, what);
}

}  // namespace emrelax
