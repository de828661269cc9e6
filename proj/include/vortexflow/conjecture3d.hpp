#pragma once

// Harness for the candidate 3D family
//
//   rho = f(s) / (a1 a2 a3),          u_i = (a_i'/a_i)(x_i - d_i) + d_i'
//   f(s) = max(-c (gamma-1)/(2 K gamma) s + alpha, 0)^(1/(gamma-1)),   s = sum ((x_k - d_k)/a_k)^2
//   a_i'' = c / (a_i (a1 a2 a3)^(gamma-1)),   d_i = d_i0 + t d_i1
//
// where c is the separation constant (xi3). The harness measures residuals and reports
// the outcome; it does not assume the family is exact.

#include <array>
#include <string>
#include <vector>

#include "vortexflow/ode.hpp"
#include "vortexflow/residual.hpp"

namespace vortexflow {

using Vec3 = std::array<double, 3>;

struct Conjecture3DParams {
  double gamma = 1.4;
  double K = 1.0;
  double xi3 = 1.0;
  double alpha3 = 1.0;
  Vec3 a0{1.0, 1.0, 1.0};
  Vec3 a1{0.0, 0.0, 0.0};
  Vec3 d0{0.0, 0.0, 0.0};
  Vec3 d1{0.0, 0.0, 0.0};

  /// Throws ParamError for gamma <= 1, K <= 0, alpha3 < 0 or any a0_i <= 0.
  void validate() const;
  /// Same family with axes reordered: new axis i is old axis perm[i].
  [[nodiscard]] Conjecture3DParams permuted(const std::array<int, 3>& perm) const;
};

struct Scale3D {
  double t = 0.0;
  Vec3 a{};
  Vec3 adot{};
};

/// Coupled scale trajectories with drift monitoring of the first integral
/// sum a_i'^2/2 + c / ((gamma-1) (a1 a2 a3)^(gamma-1)).
class ScaleTrajectory3D {
 public:
  ScaleTrajectory3D(ode::DenseSolution<3> solution, const Conjecture3DParams& params);

  [[nodiscard]] Scale3D at(double t) const;
  [[nodiscard]] const TerminalEvent& event() const noexcept { return solution_.event(); }
  [[nodiscard]] double t_begin() const { return solution_.t_begin(); }
  [[nodiscard]] double t_end() const { return solution_.t_end(); }
  [[nodiscard]] bool covers(double t) const { return solution_.covers(t); }
  [[nodiscard]] std::size_t size() const { return solution_.nodes().size(); }
  [[nodiscard]] const std::vector<ode::Node<3>>& nodes() const { return solution_.nodes(); }
  [[nodiscard]] double max_invariant_drift() const noexcept { return max_drift_; }

 private:
  ode::DenseSolution<3> solution_;
  double max_drift_ = 0.0;
};

double first_integral_3d(const Conjecture3DParams& params, const Vec3& a, const Vec3& adot);

/// Integrates the coupled scale system over [0, t_end]. Collapse of any axis ends the
/// run (see event()); a controller failure throws Error(StepFailure).
ScaleTrajectory3D integrate_scales_3d(const Conjecture3DParams& params, double t_end,
                                      IntegrationConfig cfg = {});

struct Grid3DSpec {
  /// Half-widths of the sampling box around the drift centre d(t).
  Vec3 half_width{0.5, 0.5, 0.5};
  int n = 7;  // points per axis
  double h = 1e-3;
  double h_t = 5e-4;
  int fd_order = 4;
  double support_margin = 0.9;

  void validate() const;
};

struct Sample3D {
  double rho = 0.0;
  Vec3 u{};
  double p = 0.0;
};

Sample3D eval_flow_3d(const Conjecture3DParams& params, const Scale3D& state, const Vec3& x);

/// Residuals of the N = 3 system on a box around d(t). Throws
/// Error(GridTouchesSupportBoundary) or Error(TrajectoryTooShort).
ResidualReport euler_residual_3d(const Conjecture3DParams& params, const ScaleTrajectory3D& scales,
                                 double t, const Grid3DSpec& grid);

struct ConjectureReport {
  bool pass = false;
  double tolerance = 1e-6;
  ResidualReport finest;
  ConvergenceResult convergence;
  double invariant_drift = 0.0;
  std::string verdict;  // "PASS" or "FAIL: <equation> at (x, y, z)"
  std::string note;
};

/// Runs the residual over an h-ladder (h_t proportional to h) and decides PASS/FAIL:
/// PASS requires the finest normalized residual <= tolerance and either machine-zero
/// residuals or an observed order of at least 1.5.
ConjectureReport check_conjecture_3d(const Conjecture3DParams& params, double t,
                                     const Grid3DSpec& grid, const std::vector<double>& h_ladder,
                                     double tolerance = 1e-6);

}  // namespace vortexflow
