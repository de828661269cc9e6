#pragma once

// Long-time behaviour of the scale equation from the energy picture:
// global existence, time-periodic breathing, exact equilibrium, or collapse in finite time.

#include <optional>
#include <string>

#include "vortexflow/emden.hpp"

namespace vortexflow {

enum class RegimeKind { Global, TimePeriodic, Steady, FiniteTimeBlowup };

const char* to_string(RegimeKind kind) noexcept;

/// Critical quantities of the potential used by the decision tree.
struct CriticalData {
  std::optional<double> a_max;           // gamma > 2, lambda < 0: potential maximum
  std::optional<double> F_pot_at_a_max;
  std::optional<double> a_eq;            // 1 < gamma < 2, lambda < 0: potential minimum
  std::optional<double> F_pot_at_a_eq;
  std::optional<double> blowup_threshold;  // gamma == 2, xi^2 < -lambda: sqrt(-lambda-xi^2)/a0
};

struct BlowupTime {
  double t_star = 0.0;
  double error_bar = 0.0;  // zero for closed-form values
  bool closed_form = false;
};

struct Regime {
  RegimeKind kind = RegimeKind::Global;
  /// Case label: "1", "2aI", "2aII", "2b-blowup", "2b-global", "3a",
  /// "3bI-global", "3bI-blowup", "3bII-global", "3bII-blowup".
  std::string branch;
  EnergySplit initial_energy;
  CriticalData critical;
  std::optional<double> period;         // TimePeriodic
  std::optional<double> period_error;   // quadrature error estimate
  std::optional<double> a_min;          // TimePeriodic turning points
  std::optional<double> a_max_turning;
  std::optional<BlowupTime> blowup;     // FiniteTimeBlowup
  /// Free-form remarks, e.g. the suspected typo in the linear-collapse time.
  std::string note;
};

/// True when the kind is one the branch label admits.
bool branch_consistent(const Regime& regime);

/// Full decision tree. Throws Error(ZeroRotation) for xi == 0.
Regime classify(const SolutionParams& params);

CriticalData a_max_critical(const SolutionParams& params);

struct TurningPoints {
  double a_min = 0.0;
  double a_max = 0.0;
};

/// Roots of F_pot(a) = E(0) around the potential well; requires 1 < gamma < 2, E(0) < 0.
TurningPoints turning_points(const SolutionParams& params);

struct PeriodEstimate {
  double period = 0.0;
  double error_estimate = 0.0;
  int levels = 0;  // tanh-sinh refinement levels used
};

/// T = 2 * integral_{a_min}^{a_max} da / sqrt(2 (E(0) - F_pot(a))), evaluated by tanh-sinh
/// quadrature, which absorbs the inverse square root singularities at both turning points.
/// Throws Error(DegenerateOrbit) when a_min == a_max.
PeriodEstimate period_quadrature(const SolutionParams& params);

struct CertificationReport {
  Regime regime;
  std::string symbolic_verdict;
  std::string numeric_verdict;
  bool consistent = false;
  double horizon = 0.0;
  /// Collapse time seen by integration, when one occurred.
  std::optional<double> observed_collapse;
  /// |state(T) - state(0)| for periodic regimes, max |a - a0| for steady ones.
  std::optional<double> return_error;
  std::string detail;
};

class CertificationMismatchError : public Error {
 public:
  explicit CertificationMismatchError(CertificationReport report);
  [[nodiscard]] const CertificationReport& report() const noexcept { return report_; }

 private:
  CertificationReport report_;
};

/// Cross-checks a classification by direct integration. Throws
/// CertificationMismatchError, which carries both verdicts, on disagreement.
CertificationReport certify(const SolutionParams& params, const Regime& regime, double horizon,
                            const IntegrationConfig& base_cfg = {});

}  // namespace vortexflow
