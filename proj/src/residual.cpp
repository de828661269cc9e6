#include "vortexflow/residual.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "residual_core.hpp"

namespace vortexflow {

void GridSpec::validate() const {
  if (!(h > 0.0) || !(h_t > 0.0)) throw Error(ErrorCode::InvalidGrid, "steps h and h_t must be positive");
  if (fd_order != 2 && fd_order != 4) throw Error(ErrorCode::InvalidGrid, "fd_order must be 2 or 4");
  if (!(support_margin > 0.0 && support_margin <= 1.0)) {
    throw Error(ErrorCode::InvalidGrid, "support_margin must lie in (0, 1]");
  }
  if (region == RegionKind::Annulus) {
    if (!(r_lo >= 0.0) || !(r_hi >= r_lo) || n_r < 1 || n_theta < 1) {
      throw Error(ErrorCode::InvalidGrid, "annulus needs 0 <= r_lo <= r_hi and positive counts");
    }
  } else {
    if (!(x_hi >= x_lo) || !(y_hi >= y_lo) || nx < 1 || ny < 1) {
      throw Error(ErrorCode::InvalidGrid, "box needs ordered extents and positive counts");
    }
  }
}

std::vector<QueryPoint> GridSpec::points() const {
  validate();
  std::vector<QueryPoint> out;
  auto lerp = [](double lo, double hi, int i, int n) {
    return n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  };
  if (region == RegionKind::Annulus) {
    out.reserve(static_cast<std::size_t>(n_r) * static_cast<std::size_t>(n_theta));
    for (int i = 0; i < n_r; ++i) {
      const double r = lerp(r_lo, r_hi, i, n_r);
      for (int j = 0; j < n_theta; ++j) {
        // Half-cell angular offset keeps samples off the coordinate axes.
        const double th = 2.0 * std::numbers::pi * (j + 0.5) / n_theta;
        out.push_back({r * std::cos(th), r * std::sin(th)});
      }
    }
  } else {
    out.reserve(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
    for (int i = 0; i < nx; ++i) {
      for (int j = 0; j < ny; ++j) out.push_back({lerp(x_lo, x_hi, i, nx), lerp(y_lo, y_hi, j, ny)});
    }
  }
  return out;
}

double GridSpec::max_stencil_radius() const {
  const double reach = (fd_order == 4 ? 2.0 : 1.0) * h;
  if (region == RegionKind::Annulus) return r_hi + reach;
  const double xm = std::max(std::abs(x_lo), std::abs(x_hi)) + reach;
  const double ym = std::max(std::abs(y_lo), std::abs(y_hi)) + reach;
  return std::hypot(xm, ym);
}

double ResidualReport::normalized_max() const {
  double worst = 0.0;
  for (const auto& eq : equations) worst = std::max(worst, eq.normalized_max);
  return worst;
}

const EquationResidual& ResidualReport::equation(const std::string& name) const {
  for (const auto& eq : equations) {
    if (eq.name == name) return eq;
  }
  throw Error(ErrorCode::InvalidConfig, "no equation named " + name);
}

namespace {

detail::Field<2> as_core_field(const Field2D& field) {
  return [&field](double t, const detail::Point<2>& x) {
    const FlowSample s = field(t, {x[0], x[1]});
    return detail::Sample<2>{s.rho, {s.u1, s.u2}};
  };
}

std::vector<detail::Point<2>> as_core_points(const std::vector<QueryPoint>& pts) {
  std::vector<detail::Point<2>> out;
  out.reserve(pts.size());
  for (const auto& q : pts) out.push_back({q.x, q.y});
  return out;
}

}  // namespace

IntegrationConfig residual_integration_config(double t_end) {
  IntegrationConfig cfg;
  cfg.rel_tol = 1e-13;
  cfg.abs_tol = 1e-13;
  cfg.max_step = 1e-2;
  cfg.t_end = t_end;
  return cfg;
}

namespace {

void check_family_grid(const SolutionParams& params, const Trajectory& traj, double t,
                       const GridSpec& grid) {
  grid.validate();
  if (!traj.covers(t - grid.h_t) || !traj.covers(t + grid.h_t)) {
    throw Error(ErrorCode::TrajectoryTooShort,
                "t +/- h_t must lie inside the integrated span of the trajectory");
  }
  const double sb = support_boundary_s(params);
  if (std::isinf(sb)) return;
  double a_min = traj.at(t).a;
  a_min = std::min({a_min, traj.at(t - grid.h_t).a, traj.at(t + grid.h_t).a});
  const double r = grid.max_stencil_radius();
  if (r * r / (a_min * a_min) > grid.support_margin * sb) {
    throw Error(ErrorCode::GridTouchesSupportBoundary,
                "stencil reaches s = " + std::to_string(r * r / (a_min * a_min)) +
                    " beyond the margin of the support boundary s = " + std::to_string(sb));
  }
}

}  // namespace

ResidualReport residual_2d(const Field2D& field, double K, double gamma, double t,
                           const GridSpec& grid, double mu, const Field2D* time_derivative,
                           double viscous_h) {
  grid.validate();
  detail::ResidualOptions opt;
  opt.h = grid.h;
  opt.h_t = grid.h_t;
  opt.fd_order = grid.fd_order;
  opt.K = K;
  opt.gamma = gamma;
  opt.mu = mu;
  opt.viscous_h = viscous_h;
  const detail::Field<2> core = as_core_field(field);
  if (time_derivative != nullptr) {
    const detail::Field<2> core_dt = as_core_field(*time_derivative);
    return detail::residual_core<2>(core, &core_dt, t, as_core_points(grid.points()), opt);
  }
  return detail::residual_core<2>(core, nullptr, t, as_core_points(grid.points()), opt);
}

ResidualReport navier_stokes_residual_2d(const SolutionParams& params, const Trajectory& traj,
                                         double t, const GridSpec& grid, double mu,
                                         double viscous_h) {
  check_family_grid(params, traj, t, grid);
  const Field2D field = [&](double tt, const QueryPoint& q) {
    return eval_flow(params, traj.at(tt), q);
  };
  return residual_2d(field, params.K(), params.gamma(), t, grid, mu, nullptr, viscous_h);
}

ResidualReport euler_residual_2d(const SolutionParams& params, const Trajectory& traj, double t,
                                 const GridSpec& grid) {
  return navier_stokes_residual_2d(params, traj, t, grid, 0.0);
}

ResidualReport zz_direct_residual(double t, double K, const GridSpec& grid, ZzOrientation orientation) {
  if (!(t > 0.0)) throw Error(ErrorCode::NonPositiveTime, "field defined for t > 0 only");
  grid.validate();
  for (const auto& q : grid.points()) {
    if (q.r() < 2.0 * grid.h) {
      throw Error(ErrorCode::InvalidGrid, "grid must keep a distance of 2h from the origin");
    }
  }
  const double sign = orientation == ZzOrientation::Mirrored ? -1.0 : 1.0;
  const Field2D field = [K, sign](double tt, const QueryPoint& q) {
    return zhang_zheng_field(tt, {q.x, sign * q.y}, K);
  };
  // rho ~ 1/t^2 and u ~ 1/t at fixed x.
  const Field2D dfield = [K, sign](double tt, const QueryPoint& q) {
    const FlowSample s = zhang_zheng_field(tt, {q.x, sign * q.y}, K);
    return FlowSample{-2.0 * s.rho / tt, -s.u1 / tt, -s.u2 / tt, 0.0};
  };
  ResidualReport rep = residual_2d(field, K, 2.0, t, grid, 0.0, &dfield);
  rep.note = orientation == ZzOrientation::Mirrored
                 ? "printed gamma = 2 formulas evaluated at (x, -y)"
                 : "printed gamma = 2 formulas evaluated as written";
  return rep;
}

ResidualReport mass_residual_generic_G(const GenericRotationField& field, double t,
                                       const GridSpec& grid) {
  grid.validate();
  const int order = grid.fd_order;
  const double h = grid.h;

  auto density = [&](double tt, double x, double y) {
    const auto [a, adot] = field.scale(tt);
    (void)adot;
    return field.f(std::hypot(x, y) / a) / (a * a);
  };
  // Radial and tangential mass fluxes.
  auto flux_radial = [&](double x, double y) {
    const auto [a, adot] = field.scale(t);
    const double rho = density(t, x, y);
    return std::pair{rho * adot / a * x, rho * adot / a * y};
  };
  auto flux_tangential = [&](double x, double y) {
    const double r = std::hypot(x, y);
    const double w = density(t, x, y) * field.G(t, r) / r;
    return std::pair{-w * y, w * x};
  };
  auto divergence = [&](const auto& flux, double x, double y) {
    const auto fx = [&](double dx) { return flux(x + dx, y).first; };
    const auto fy = [&](double dy) { return flux(x, y + dy).second; };
    const double dfx = detail::central_diff(order == 4 ? fx(-2 * h) : 0.0, fx(-h), fx(h),
                                            order == 4 ? fx(2 * h) : 0.0, h, order);
    const double dfy = detail::central_diff(order == 4 ? fy(-2 * h) : 0.0, fy(-h), fy(h),
                                            order == 4 ? fy(2 * h) : 0.0, h, order);
    return dfx + dfy;
  };

  const auto pts = grid.points();
  std::vector<double> res;
  res.reserve(pts.size());
  double scale = 0.0;
  for (const auto& q : pts) {
    if (q.r() <= (order == 4 ? 2.0 : 1.0) * h) {
      throw Error(ErrorCode::InvalidGrid, "stencil must not reach the origin");
    }
    const double rho_t =
        (density(t + grid.h_t, q.x, q.y) - density(t - grid.h_t, q.x, q.y)) / (2.0 * grid.h_t);
    const double div_r = divergence(flux_radial, q.x, q.y);
    const double div_t = divergence(flux_tangential, q.x, q.y);
    res.push_back(rho_t + div_r + div_t);
    scale = std::max({scale, std::abs(rho_t), std::abs(div_r)});
  }

  EquationResidual eq;
  eq.name = "mass";
  eq.scale = scale;
  double sum = 0.0;
  std::size_t worst = 0;
  for (std::size_t i = 0; i < res.size(); ++i) {
    const double r = std::abs(res[i]);
    sum += r;
    if (r > eq.max_abs) {
      eq.max_abs = r;
      worst = i;
    }
  }
  eq.mean_abs = sum / static_cast<double>(res.size());
  eq.normalized_max = scale > 0.0 ? eq.max_abs / scale : 0.0;
  eq.normalized_mean = scale > 0.0 ? eq.mean_abs / scale : 0.0;
  eq.where = {pts[worst].x, pts[worst].y};

  ResidualReport rep;
  rep.equations.push_back(std::move(eq));
  rep.n_points = pts.size();
  rep.h = h;
  rep.h_t = grid.h_t;
  rep.note = "normalized by the radial balance |rho_t|, |div(rho u_radial)|";
  return rep;
}

Vec2 viscous_term(const std::function<Vec2(const QueryPoint&)>& velocity, const QueryPoint& q,
                  double mu, double h) {
  const Vec2 c = velocity(q);
  const Vec2 e = velocity({q.x + h, q.y});
  const Vec2 w = velocity({q.x - h, q.y});
  const Vec2 n = velocity({q.x, q.y + h});
  const Vec2 s = velocity({q.x, q.y - h});
  const double inv = mu / (h * h);
  return {(e.x + w.x + n.x + s.x - 4.0 * c.x) * inv, (e.y + w.y + n.y + s.y - 4.0 * c.y) * inv};
}

Vec2 ns_viscous_term(const SolutionParams& params, const ScaleState& state, const QueryPoint& q,
                     double mu, double h) {
  const auto velocity = [&](const QueryPoint& p) {
    const FlowSample s = eval_flow(params, state, p);
    return Vec2{s.u1, s.u2};
  };
  return viscous_term(velocity, q, mu, h);
}

ConvergenceResult residual_convergence(const std::function<double(double)>& residual_at,
                                       const std::vector<double>& ladder) {
  if (ladder.size() < 3) throw Error(ErrorCode::LadderTooShort, "need at least three steps");
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (!(ladder[i] > 0.0) || (i > 0 && !(ladder[i] < ladder[i - 1]))) {
      throw Error(ErrorCode::InvalidGrid, "ladder must be positive and strictly decreasing");
    }
  }
  ConvergenceResult out;
  out.h = ladder;
  for (double h : ladder) out.residual.push_back(residual_at(h));
  for (double r : out.residual) {
    if (!(r > kMachineZeroResidual)) out.not_applicable = true;
  }
  if (out.not_applicable) return out;

  const double n = static_cast<double>(ladder.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    const double x = std::log(ladder[i]);
    const double y = std::log(out.residual[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  out.order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return out;
}

}  // namespace vortexflow
