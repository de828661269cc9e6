#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vortexflow {

/// Machine-readable classification of every domain failure the library reports.
enum class ErrorCode {
  NonPositiveGammaMargin,
  NonPositiveK,
  NonPositiveA0,
  NegativeAlpha,
  NonFiniteParameter,
  CollapsedState,
  NonPositiveTime,
  CollapsedAtOrBefore,
  StepFailure,
  OutOfSpan,
  ZeroRotation,
  UndefinedCritical,
  NoBracket,
  DegenerateOrbit,
  CertificationMismatch,
  GridTouchesSupportBoundary,
  TrajectoryTooShort,
  InvalidGrid,
  LadderTooShort,
  BoxOutsideSupport,
  NonFiniteState,
  InvalidConfig,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Parameter validation collects every violated constraint, not just the first.
class ParamError : public Error {
 public:
  explicit ParamError(std::vector<ErrorCode> violations);

  [[nodiscard]] const std::vector<ErrorCode>& violations() const noexcept { return violations_; }

 private:
  std::vector<ErrorCode> violations_;
};

}  // namespace vortexflow
