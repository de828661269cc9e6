#include "vortexflow/conjecture3d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "residual_core.hpp"

namespace vortexflow {

void Conjecture3DParams::validate() const {
  std::vector<ErrorCode> violations;
  if (!(gamma > 1.0)) violations.push_back(ErrorCode::NonPositiveGammaMargin);
  if (!(K > 0.0)) violations.push_back(ErrorCode::NonPositiveK);
  if (!std::all_of(a0.begin(), a0.end(), [](double v) { return v > 0.0; })) {
    violations.push_back(ErrorCode::NonPositiveA0);
  }
  if (!(alpha3 >= 0.0)) violations.push_back(ErrorCode::NegativeAlpha);
  if (!violations.empty()) throw ParamError(std::move(violations));
}

Conjecture3DParams Conjecture3DParams::permuted(const std::array<int, 3>& perm) const {
  Conjecture3DParams out = *this;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto j = static_cast<std::size_t>(perm[i]);
    out.a0[i] = a0[j];
    out.a1[i] = a1[j];
    out.d0[i] = d0[j];
    out.d1[i] = d1[j];
  }
  return out;
}

namespace {

struct CoupledScales {
  double c;
  double gamma;

  [[nodiscard]] ode::Vec<3> accel(const ode::Vec<3>& a, const ode::Vec<3>& /*v*/) const {
    const double vol = std::pow(ode::ordered_product(a), gamma - 1.0);
    return {c / (a[0] * vol), c / (a[1] * vol), c / (a[2] * vol)};
  }
};

double support_boundary_s3(const Conjecture3DParams& p) {
  if (p.xi3 * (p.gamma - 1.0) <= 0.0) return std::numeric_limits<double>::infinity();
  return 2.0 * p.K * p.gamma * p.alpha3 / (p.xi3 * (p.gamma - 1.0));
}

}  // namespace

double first_integral_3d(const Conjecture3DParams& params, const Vec3& a, const Vec3& adot) {
  const double kinetic = 0.5 * ode::ordered_sum(Vec3{adot[0] * adot[0], adot[1] * adot[1], adot[2] * adot[2]});
  const double vol = std::pow(ode::ordered_product(a), params.gamma - 1.0);
  return kinetic + params.xi3 / ((params.gamma - 1.0) * vol);
}

ScaleTrajectory3D::ScaleTrajectory3D(ode::DenseSolution<3> solution, const Conjecture3DParams& params)
    : solution_(std::move(solution)) {
  const auto& nodes = solution_.nodes();
  if (nodes.empty()) return;
  const double i0 = first_integral_3d(params, nodes.front().q, nodes.front().v);
  const double scale = std::max(1.0, std::abs(i0));
  for (const auto& n : nodes) {
    max_drift_ = std::max(max_drift_, std::abs(first_integral_3d(params, n.q, n.v) - i0) / scale);
  }
}

Scale3D ScaleTrajectory3D::at(double t) const {
  const auto [q, v] = solution_.at(t);
  return {t, q, v};
}

ScaleTrajectory3D integrate_scales_3d(const Conjecture3DParams& params, double t_end,
                                      IntegrationConfig cfg) {
  params.validate();
  cfg.t_end = t_end;
  const CoupledScales sys{params.xi3, params.gamma};
  ScaleTrajectory3D traj(ode::integrate<3>(sys, 0.0, params.a0, params.a1, cfg), params);
  if (traj.event().kind == Termination::StepFailure) {
    throw Error(ErrorCode::StepFailure, traj.event().message + " at t = " + std::to_string(traj.event().t));
  }
  return traj;
}

void Grid3DSpec::validate() const {
  if (!(h > 0.0) || !(h_t > 0.0)) throw Error(ErrorCode::InvalidGrid, "steps must be positive");
  if (fd_order != 2 && fd_order != 4) throw Error(ErrorCode::InvalidGrid, "fd_order must be 2 or 4");
  if (n < 1) throw Error(ErrorCode::InvalidGrid, "need at least one point per axis");
  if (!std::all_of(half_width.begin(), half_width.end(), [](double w) { return w >= 0.0; })) {
    throw Error(ErrorCode::InvalidGrid, "half widths must be non-negative");
  }
  if (!(support_margin > 0.0 && support_margin <= 1.0)) {
    throw Error(ErrorCode::InvalidGrid, "support_margin must lie in (0, 1]");
  }
}

Sample3D eval_flow_3d(const Conjecture3DParams& params, const Scale3D& state, const Vec3& x) {
  Sample3D out;
  Vec3 sq{};
  for (std::size_t k = 0; k < 3; ++k) {
    if (!(state.a[k] > 0.0)) throw Error(ErrorCode::CollapsedState, "all scales must be positive");
    const double d = params.d0[k] + state.t * params.d1[k];
    const double rel = (x[k] - d) / state.a[k];
    sq[k] = rel * rel;
    out.u[k] = state.adot[k] / state.a[k] * (x[k] - d) + params.d1[k];
  }
  // Order-free sums keep the evaluation exactly equivariant under axis permutations.
  const double s = ode::ordered_sum(sq);
  const double vol = ode::ordered_product(state.a);
  const double g = params.gamma;
  const double base = std::max(-params.xi3 * (g - 1.0) / (2.0 * params.K * g) * s + params.alpha3, 0.0);
  out.rho = std::pow(base, 1.0 / (g - 1.0)) / vol;
  out.p = params.K * std::pow(out.rho, g);
  return out;
}

ResidualReport euler_residual_3d(const Conjecture3DParams& params, const ScaleTrajectory3D& scales,
                                 double t, const Grid3DSpec& grid) {
  params.validate();
  grid.validate();
  if (!scales.covers(t - grid.h_t) || !scales.covers(t + grid.h_t)) {
    throw Error(ErrorCode::TrajectoryTooShort, "t +/- h_t must lie inside the integrated span");
  }

  const double sb = support_boundary_s3(params);
  if (!std::isinf(sb)) {
    const double reach = (grid.fd_order == 4 ? 2.0 : 1.0) * grid.h;
    double s_max = 0.0;
    for (double tt : {t - grid.h_t, t, t + grid.h_t}) {
      const Scale3D st = scales.at(tt);
      double s = 0.0;
      for (std::size_t k = 0; k < 3; ++k) {
        // Drift of the centre between t and tt shifts the box relative to d(tt).
        const double shift = std::abs((tt - t) * params.d1[k]);
        const double w = (grid.half_width[k] + reach + shift) / st.a[k];
        s += w * w;
      }
      s_max = std::max(s_max, s);
    }
    if (s_max > grid.support_margin * sb) {
      throw Error(ErrorCode::GridTouchesSupportBoundary,
                  "box reaches s = " + std::to_string(s_max) + " beyond the support margin of s = " +
                      std::to_string(sb));
    }
  }

  std::vector<detail::Point<3>> points;
  Vec3 centre{};
  for (std::size_t k = 0; k < 3; ++k) centre[k] = params.d0[k] + t * params.d1[k];
  auto coord = [&](std::size_t k, int i) {
    if (grid.n == 1) return centre[k];
    return centre[k] - grid.half_width[k] + 2.0 * grid.half_width[k] * i / (grid.n - 1);
  };
  for (int i = 0; i < grid.n; ++i) {
    for (int j = 0; j < grid.n; ++j) {
      for (int k = 0; k < grid.n; ++k) points.push_back({coord(0, i), coord(1, j), coord(2, k)});
    }
  }

  const detail::Field<3> field = [&](double tt, const detail::Point<3>& x) {
    const Sample3D s = eval_flow_3d(params, scales.at(tt), x);
    return detail::Sample<3>{s.rho, s.u};
  };
  detail::ResidualOptions opt;
  opt.h = grid.h;
  opt.h_t = grid.h_t;
  opt.fd_order = grid.fd_order;
  opt.K = params.K;
  opt.gamma = params.gamma;
  ResidualReport rep = detail::residual_core<3>(field, nullptr, t, points, opt);
  rep.note = "candidate 3D family as displayed: no swirl term";
  return rep;
}

ConjectureReport check_conjecture_3d(const Conjecture3DParams& params, double t,
                                     const Grid3DSpec& grid, const std::vector<double>& h_ladder,
                                     double tolerance) {
  grid.validate();
  if (h_ladder.empty()) throw Error(ErrorCode::LadderTooShort, "empty ladder");
  const double ratio = grid.h_t / grid.h;
  const double h_t_max = ratio * *std::max_element(h_ladder.begin(), h_ladder.end());
  const ScaleTrajectory3D scales = integrate_scales_3d(params, t + 2.0 * h_t_max, residual_integration_config(1.0));
  if (scales.event().kind == Termination::Collapsed) {
    throw Error(ErrorCode::TrajectoryTooShort, "an axis collapsed before the evaluation time");
  }

  ConjectureReport out;
  out.tolerance = tolerance;
  out.invariant_drift = scales.max_invariant_drift();
  out.note = "the displayed 3D family contains no swirl term; it is tested exactly as displayed";

  auto run = [&](double h) {
    Grid3DSpec g = grid;
    g.h = h;
    g.h_t = ratio * h;
    return euler_residual_3d(params, scales, t, g);
  };
  std::vector<ResidualReport> reports;
  auto residual_at = [&](double h) {
    reports.push_back(run(h));
    return reports.back().normalized_max();
  };
  if (h_ladder.size() >= 3) {
    out.convergence = residual_convergence(residual_at, h_ladder);
  } else {
    for (double h : h_ladder) {
      out.convergence.h.push_back(h);
      out.convergence.residual.push_back(residual_at(h));
    }
  }
  out.finest = reports.back();
  out.finest.ladder_h = out.convergence.h;
  out.finest.ladder_residual = out.convergence.residual;
  out.finest.order = out.convergence.order;

  const double finest = out.finest.normalized_max();
  const bool converging = out.convergence.not_applicable ||
                          (out.convergence.order && *out.convergence.order >= 1.5) ||
                          finest <= kMachineZeroResidual;
  out.pass = finest <= tolerance && converging;
  if (out.pass) {
    out.verdict = "PASS";
  } else {
    const EquationResidual* worst = &out.finest.equations.front();
    for (const auto& eq : out.finest.equations) {
      if (eq.normalized_max > worst->normalized_max) worst = &eq;
    }
    std::ostringstream msg;
    msg.precision(10);
    msg << "FAIL: " << worst->name << " residual " << worst->normalized_max << " at (";
    for (std::size_t i = 0; i < worst->where.size(); ++i) msg << (i ? ", " : "") << worst->where[i];
    msg << ")";
    if (!converging) msg << "; residual does not converge under refinement";
    out.verdict = msg.str();
  }
  return out;
}

}  // namespace vortexflow
