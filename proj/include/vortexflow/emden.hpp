#pragma once

// Scale equation of the exact family:
//
//   a'' = xi^2 / a^3 + lambda / a^(2 gamma - 1),   a(0) = a0 > 0,  a'(0) = a1
//
// with the conserved energy E = a'^2/2 + xi^2/(2 a^2) + lambda / ((2 gamma - 2) a^(2 gamma - 2)).

#include <optional>
#include <vector>

#include "vortexflow/ode.hpp"
#include "vortexflow/solution.hpp"

namespace vortexflow {

struct EnergySplit {
  double E = 0.0;
  double F_kin = 0.0;
  double F_pot = 0.0;
};

struct ScaleRate {
  double adot = 0.0;
  double addot = 0.0;
};

ScaleRate emden_rhs(const ScaleState& state, const SolutionParams& params);

/// Potential part of the energy, xi^2/(2a^2) + lambda/((2gamma-2) a^(2gamma-2)).
double potential(double a, const SolutionParams& params);

EnergySplit energy(const ScaleState& state, const SolutionParams& params);

/// Integrated scale curve with per-node energy bookkeeping and dense output.
class Trajectory {
 public:
  Trajectory(ode::DenseSolution<1> solution, const SolutionParams& params);

  [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
  [[nodiscard]] const std::vector<ScaleState>& nodes() const noexcept { return nodes_; }
  [[nodiscard]] const std::vector<EnergySplit>& energies() const noexcept { return energies_; }
  /// |E(t_k) - E(0)| / max(1, |E(0)|) per node.
  [[nodiscard]] const std::vector<double>& drift() const noexcept { return drift_; }
  [[nodiscard]] const TerminalEvent& event() const noexcept { return solution_.event(); }
  [[nodiscard]] double t_begin() const { return solution_.t_begin(); }
  [[nodiscard]] double t_end() const { return solution_.t_end(); }
  [[nodiscard]] bool covers(double t) const { return solution_.covers(t); }
  [[nodiscard]] bool collapsed() const noexcept {
    return event().kind == Termination::Collapsed;
  }

  /// Dense (a, a') at any t in [t_begin, t_end]; exact at node times.
  [[nodiscard]] ScaleState at(double t) const;

 private:
  ode::DenseSolution<1> solution_;
  std::vector<ScaleState> nodes_;
  std::vector<EnergySplit> energies_;
  std::vector<double> drift_;
};

/// Integrates the scale equation from (a0, a1) at time t0 over [t0, t0 + cfg.t_end].
Trajectory integrate(const SolutionParams& params, const IntegrationConfig& cfg, double t0 = 0.0);

/// Throws Error(StepFailure) carrying the last good state when the controller gave up.
void require_no_step_failure(const Trajectory& traj);

/// Exact gamma = 2 solution a^2 = a0^2 + 2 a0 a1 t + 2 E(0) t^2.
ScaleState closed_form_gamma2(const SolutionParams& params, double t);

/// First positive root of the gamma = 2 quadratic a^2(t), if any.
std::optional<double> gamma2_collapse_time(const SolutionParams& params);

/// Worst relative energy drift across the trajectory's nodes.
double energy_drift(const Trajectory& traj);

/// Time of the first return to the initial turning point: the first node interval after
/// the start where a' changes sign in the same direction as at departure, refined by
/// bisection on the dense output. Requires a1 == 0 at the start. Empty when no such
/// crossing lies inside the trajectory.
std::optional<double> first_return_time(const Trajectory& traj);

}  // namespace vortexflow
