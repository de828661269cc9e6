#pragma once

// First-order finite-volume solver for 2D isentropic Euler with p = K rho^gamma:
// dimension-by-dimension Rusanov fluxes, forward Euler in time, a ring of ghost cells
// refreshed from an exact solution (time-dependent Dirichlet).

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "vortexflow/emden.hpp"
#include "vortexflow/solution.hpp"

namespace vortexflow {

/// Exact (or boundary) state as a function of time and position.
using ExactField = std::function<FlowSample(double t, const QueryPoint& q)>;

struct Box {
  double x_lo = -1.0;
  double x_hi = 1.0;
  double y_lo = -1.0;
  double y_hi = 1.0;
};

struct FvConfig {
  Box box;
  int resolution = 64;  // cells per axis
  double cfl = 0.4;
  double rho_floor = 1e-12;
  double t0 = 0.0;
  double t_end = 0.2;
  double K = 1.0;
  double gamma = 2.0;

  /// Throws Error(InvalidConfig) unless cfl in (0, 1), resolution >= 16, rho_floor > 0,
  /// K > 0, gamma > 1, a non-empty box and t_end >= t0.
  void validate() const;
};

/// Cell averages (rho, rho u1, rho u2) on an nx by ny grid plus one ghost ring.
/// Storage index of cell (i, j), i, j in [-1, n], is (j + 1) * (nx + 2) + (i + 1).
class ConservativeField {
 public:
  ConservativeField(const Box& box, int nx, int ny);

  [[nodiscard]] int nx() const noexcept { return nx_; }
  [[nodiscard]] int ny() const noexcept { return ny_; }
  [[nodiscard]] double dx() const noexcept { return dx_; }
  [[nodiscard]] double dy() const noexcept { return dy_; }
  [[nodiscard]] const Box& box() const noexcept { return box_; }
  [[nodiscard]] double x(int i) const noexcept { return box_.x_lo + (i + 0.5) * dx_; }
  [[nodiscard]] double y(int j) const noexcept { return box_.y_lo + (j + 0.5) * dy_; }
  [[nodiscard]] std::size_t index(int i, int j) const noexcept {
    return static_cast<std::size_t>(j + 1) * static_cast<std::size_t>(nx_ + 2) +
           static_cast<std::size_t>(i + 1);
  }

  double t = 0.0;
  std::size_t floor_count = 0;  // cumulative number of floored cell updates
  std::vector<double> rho;
  std::vector<double> m1;
  std::vector<double> m2;

 private:
  Box box_;
  int nx_;
  int ny_;
  double dx_;
  double dy_;
};

/// Samples the exact field at cell centres (ghost ring included).
ConservativeField init_from_field(const ExactField& exact, double t0, const FvConfig& cfg);

/// Same, for a family member. Throws Error(BoxOutsideSupport) unless every cell centre,
/// ghosts included, has s <= 0.9 s_boundary at t0 and at cfg.t_end, and
/// Error(TrajectoryTooShort) unless the trajectory covers [t0, t_end].
ConservativeField init_from_exact(const SolutionParams& params, const Trajectory& traj, double t0,
                                  const FvConfig& cfg);

struct StepInfo {
  double dt = 0.0;
  std::size_t floored = 0;
};

/// Advances one forward-Euler step of size min(cfl min(dx, dy) / max(|u| + c), dt_cap),
/// then refreshes the ghost ring from `boundary` at the new time. Throws
/// Error(NonFiniteState) when a NaN or Inf appears.
StepInfo step(ConservativeField& field, const FvConfig& cfg, const ExactField& boundary,
              double dt_cap = std::numeric_limits<double>::infinity());

/// Runs from field.t to cfg.t_end; returns the number of steps taken.
std::size_t advance(ConservativeField& field, const FvConfig& cfg, const ExactField& boundary);

struct ErrorRow {
  int resolution = 0;
  double l1_rho = 0.0;
  double linf_rho = 0.0;
  double l1_momentum = 0.0;    // |m1 - m1*| + |m2 - m2*|, integrated
  double linf_momentum = 0.0;  // max over cells of max(|m1 - m1*|, |m2 - m2*|)
  std::size_t steps = 0;
  std::size_t floor_count = 0;
  /// log(e_prev / e) / log(n / n_prev) for the L1 density error; empty on the first row
  /// or when either error is zero.
  std::optional<double> order_l1_rho;
};

struct ErrorReport {
  std::vector<ErrorRow> rows;
};

/// Interior-cell errors of `field` against the exact cell-centre values at field.t.
ErrorRow compare(const ConservativeField& field, const ExactField& exact);

/// Runs every resolution from cfg.t0 to cfg.t_end and tabulates errors.
/// Throws Error(InvalidConfig) with fewer than two resolutions.
ErrorReport run_and_compare(const ExactField& exact, const FvConfig& cfg,
                            const std::vector<int>& resolutions);

/// Family version; the support check of init_from_exact applies to every resolution.
ErrorReport run_and_compare(const SolutionParams& params, const Trajectory& traj,
                            const FvConfig& cfg, const std::vector<int>& resolutions);

/// Exact field of a family member along a trajectory.
ExactField family_field(const SolutionParams& params, const Trajectory& traj);

/// Two-state tube along x: (rho_left, 0) for x < x_split, (rho_right, 0) otherwise.
/// The ghost ring keeps these constant states.
ExactField riemann_tube(double rho_left, double rho_right, double x_split, double K, double gamma);

}  // namespace vortexflow
