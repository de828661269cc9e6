#pragma once

// Finite-difference residuals of the isentropic Euler / Navier-Stokes system
//
//   rho_t + div(rho u) = 0
//   rho [u_t + (u . grad) u] + grad(K rho^gamma) = mu Lap u
//
// evaluated on exact fields. Each equation's residual is normalized by the largest
// magnitude of its individual terms over the sampling grid.

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vortexflow/emden.hpp"
#include "vortexflow/solution.hpp"

namespace vortexflow {

enum class RegionKind { Annulus, Box };

struct GridSpec {
  RegionKind region = RegionKind::Annulus;
  // Annulus sampling: n_r radii in [r_lo, r_hi] times n_theta angles.
  double r_lo = 0.1;
  double r_hi = 1.0;
  int n_r = 16;
  int n_theta = 24;
  // Box sampling: nx by ny points on [x_lo, x_hi] x [y_lo, y_hi].
  double x_lo = -1.0;
  double x_hi = 1.0;
  double y_lo = -1.0;
  double y_hi = 1.0;
  int nx = 16;
  int ny = 16;

  double h = 1e-3;    // spatial stencil step
  double h_t = 5e-4;  // temporal stencil step
  int fd_order = 4;   // 2 (3-point) or 4 (5-point) central differences in space
  double support_margin = 0.9;

  /// Throws Error(InvalidGrid) on non-positive steps, empty ranges or unknown order.
  void validate() const;
  [[nodiscard]] std::vector<QueryPoint> points() const;
  /// Largest distance from the origin reached by any stencil point.
  [[nodiscard]] double max_stencil_radius() const;
};

struct EquationResidual {
  std::string name;
  double max_abs = 0.0;
  double mean_abs = 0.0;
  double scale = 0.0;  // largest individual term magnitude on the grid
  double normalized_max = 0.0;
  double normalized_mean = 0.0;
  std::vector<double> where;  // coordinates of the worst point
};

struct ResidualReport {
  std::vector<EquationResidual> equations;
  std::size_t n_points = 0;
  double h = 0.0;
  double h_t = 0.0;
  /// Largest |mu Lap u| over the grid divided by the matching momentum scale.
  double viscous_normalized_max = 0.0;
  std::vector<double> ladder_h;
  std::vector<double> ladder_residual;
  std::optional<double> order;
  std::string note;

  [[nodiscard]] double normalized_max() const;
  [[nodiscard]] const EquationResidual& equation(const std::string& name) const;
};

/// Space-time field handle: (t, q) -> (rho, u, p).
using Field2D = std::function<FlowSample(double t, const QueryPoint& q)>;

/// Residuals of an arbitrary 2D field; time derivatives are central differences with
/// grid.h_t unless an analytic time-derivative field (d/dt of rho, u1, u2) is supplied.
ResidualReport residual_2d(const Field2D& field, double K, double gamma, double t,
                           const GridSpec& grid, double mu = 0.0,
                           const Field2D* time_derivative = nullptr, double viscous_h = 0.0625);

/// Integrator settings for trajectories fed to the residuals: central time differences
/// divide the dense-output error by h_t, so tolerances and step size are kept tight.
IntegrationConfig residual_integration_config(double t_end);

/// Residuals of a family member along an integrated scale trajectory. Throws
/// Error(GridTouchesSupportBoundary) or Error(TrajectoryTooShort).
ResidualReport euler_residual_2d(const SolutionParams& params, const Trajectory& traj, double t,
                                 const GridSpec& grid);

/// Navier-Stokes variant: same residual with mu Lap u on the right-hand side.
ResidualReport navier_stokes_residual_2d(const SolutionParams& params, const Trajectory& traj,
                                         double t, const GridSpec& grid, double mu,
                                         double viscous_h = 0.0625);

enum class ZzOrientation {
  AsPrinted,  // ((x+y), (x-y)) / (2t): fails the mass equation
  Mirrored,   // printed formulas evaluated at (x, -y)
};

/// Residual of the gamma = 2 rotational field, with analytic time derivatives, so only
/// spatial truncation remains. Throws Error(NonPositiveTime).
ResidualReport zz_direct_residual(double t, double K, const GridSpec& grid,
                                  ZzOrientation orientation = ZzOrientation::Mirrored);

/// rho = f(r/a)/a^2 with u = (a'/a)(x, y) + G(t, r)/r (-y, x); any f >= 0, G and a.
struct GenericRotationField {
  std::function<double(double)> f;
  std::function<double(double, double)> G;
  std::function<std::pair<double, double>(double)> scale;  // t -> (a, a')
};

/// Mass-equation residual of a generic rotation field, normalized by the radial balance
/// (|rho_t| and |div(rho u_radial)|) so that the bound does not depend on G.
ResidualReport mass_residual_generic_G(const GenericRotationField& field, double t,
                                       const GridSpec& grid);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// mu times the 5-point Laplacian of a velocity field at q.
Vec2 viscous_term(const std::function<Vec2(const QueryPoint&)>& velocity, const QueryPoint& q,
                  double mu, double h);

/// mu Lap u of the family velocity at one state.
Vec2 ns_viscous_term(const SolutionParams& params, const ScaleState& state, const QueryPoint& q,
                     double mu, double h = 0.0625);

struct ConvergenceResult {
  std::vector<double> h;
  std::vector<double> residual;
  /// Least-squares slope of log(residual) against log(h); empty when not applicable.
  std::optional<double> order;
  bool not_applicable = false;
};

/// Residuals below this normalized level are treated as machine zero.
inline constexpr double kMachineZeroResidual = 1e-13;

/// Observed order over a strictly decreasing ladder of at least three steps.
/// Throws Error(LadderTooShort) or Error(InvalidGrid).
ConvergenceResult residual_convergence(const std::function<double(double)>& residual_at,
                                       const std::vector<double>& ladder);

}  // namespace vortexflow
