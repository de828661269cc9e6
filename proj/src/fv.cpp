#include "vortexflow/fv.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vortexflow {

void FvConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
  if (!(cfl > 0.0 && cfl < 1.0)) fail("cfl must lie in (0, 1)");
  if (resolution < 16) fail("resolution must be at least 16");
  if (!(rho_floor > 0.0)) fail("rho_floor must be positive");
  if (!(K > 0.0)) fail("K must be positive");
  if (!(gamma > 1.0)) fail("gamma must exceed 1");
  if (!(box.x_hi > box.x_lo) || !(box.y_hi > box.y_lo)) fail("box must have positive extent");
  if (!(t_end >= t0)) fail("t_end must not precede t0");
}

ConservativeField::ConservativeField(const Box& box, int nx, int ny)
    : box_(box), nx_(nx), ny_(ny), dx_((box.x_hi - box.x_lo) / nx), dy_((box.y_hi - box.y_lo) / ny) {
  const std::size_t n = static_cast<std::size_t>(nx + 2) * static_cast<std::size_t>(ny + 2);
  rho.assign(n, 0.0);
  m1.assign(n, 0.0);
  m2.assign(n, 0.0);
}

namespace {

void store(ConservativeField& field, int i, int j, const FlowSample& s) {
  const std::size_t k = field.index(i, j);
  field.rho[k] = s.rho;
  field.m1[k] = s.rho * s.u1;
  field.m2[k] = s.rho * s.u2;
}

void fill_ghosts(ConservativeField& field, const ExactField& exact, double t) {
  const int nx = field.nx();
  const int ny = field.ny();
  for (int i = -1; i <= nx; ++i) {
    store(field, i, -1, exact(t, {field.x(i), field.y(-1)}));
    store(field, i, ny, exact(t, {field.x(i), field.y(ny)}));
  }
  for (int j = 0; j < ny; ++j) {
    store(field, -1, j, exact(t, {field.x(-1), field.y(j)}));
    store(field, nx, j, exact(t, {field.x(nx), field.y(j)}));
  }
}

struct State {
  double rho;
  double mn;  // momentum normal to the face
  double mt;  // momentum tangential to the face
};

// Rusanov flux across a face with normal along the first momentum component.
std::array<double, 3> rusanov(const State& l, const State& r, double K, double gamma) {
  auto physical = [&](const State& s, double& speed) {
    const double un = s.mn / s.rho;
    const double p = K * std::pow(s.rho, gamma);
    speed = std::abs(un) + std::sqrt(gamma * K * std::pow(s.rho, gamma - 1.0));
    return std::array<double, 3>{s.mn, s.mn * un + p, s.mt * un};
  };
  double sl = 0.0;
  double sr = 0.0;
  const auto fl = physical(l, sl);
  const auto fr = physical(r, sr);
  const double smax = std::max(sl, sr);
  return {0.5 * (fl[0] + fr[0]) - 0.5 * smax * (r.rho - l.rho),
          0.5 * (fl[1] + fr[1]) - 0.5 * smax * (r.mn - l.mn),
          0.5 * (fl[2] + fr[2]) - 0.5 * smax * (r.mt - l.mt)};
}

void require_finite(const ConservativeField& field, int i, int j, double t) {
  const std::size_t k = field.index(i, j);
  if (std::isfinite(field.rho[k]) && std::isfinite(field.m1[k]) && std::isfinite(field.m2[k])) return;
  std::ostringstream msg;
  msg.precision(17);
  msg << "non-finite state in cell (" << i << ", " << j << ") at x = " << field.x(i)
      << ", y = " << field.y(j) << ", t = " << t << ": rho = " << field.rho[k]
      << ", m1 = " << field.m1[k] << ", m2 = " << field.m2[k];
  throw Error(ErrorCode::NonFiniteState, msg.str());
}

void check_support(const SolutionParams& params, const Trajectory& traj, const FvConfig& cfg) {
  for (double t : {cfg.t0, cfg.t_end}) {
    if (!traj.covers(t)) {
      throw Error(ErrorCode::TrajectoryTooShort, "trajectory does not cover the benchmark window");
    }
  }
  const double sb = support_boundary_s(params);
  if (std::isinf(sb)) return;
  const Box& b = cfg.box;
  // Ghost cell centres lie half a cell outside the box.
  const double gx = 0.5 * (b.x_hi - b.x_lo) / cfg.resolution;
  const double gy = 0.5 * (b.y_hi - b.y_lo) / cfg.resolution;
  const double xm = std::max(std::abs(b.x_lo - gx), std::abs(b.x_hi + gx));
  const double ym = std::max(std::abs(b.y_lo - gy), std::abs(b.y_hi + gy));
  for (double t : {cfg.t0, cfg.t_end}) {
    const ScaleState st = traj.at(t);
    const double s = QueryPoint{xm, ym}.s(st);
    if (s > 0.9 * sb) {
      std::ostringstream msg;
      msg << "box reaches s = " << s << " at t = " << t << "; support margin allows s <= " << 0.9 * sb;
      throw Error(ErrorCode::BoxOutsideSupport, msg.str());
    }
  }
}

FvConfig with_params(FvConfig cfg, const SolutionParams& params) {
  cfg.K = params.K();
  cfg.gamma = params.gamma();
  return cfg;
}

}  // namespace

ConservativeField init_from_field(const ExactField& exact, double t0, const FvConfig& cfg) {
  cfg.validate();
  ConservativeField field(cfg.box, cfg.resolution, cfg.resolution);
  field.t = t0;
  for (int j = -1; j <= field.ny(); ++j) {
    for (int i = -1; i <= field.nx(); ++i) store(field, i, j, exact(t0, {field.x(i), field.y(j)}));
  }
  return field;
}

ExactField family_field(const SolutionParams& params, const Trajectory& traj) {
  return [params, &traj](double t, const QueryPoint& q) { return eval_flow(params, traj.at(t), q); };
}

ConservativeField init_from_exact(const SolutionParams& params, const Trajectory& traj, double t0,
                                  const FvConfig& cfg) {
  FvConfig c = with_params(cfg, params);
  c.t0 = t0;
  c.validate();
  check_support(params, traj, c);
  return init_from_field(family_field(params, traj), t0, c);
}

StepInfo step(ConservativeField& field, const FvConfig& cfg, const ExactField& boundary, double dt_cap) {
  const int nx = field.nx();
  const int ny = field.ny();
  const double K = cfg.K;
  const double g = cfg.gamma;

  double smax = 0.0;
  for (int j = -1; j <= ny; ++j) {
    for (int i = -1; i <= nx; ++i) {
      require_finite(field, i, j, field.t);
      const std::size_t k = field.index(i, j);
      const double r = field.rho[k];
      const double c = std::sqrt(g * K * std::pow(r, g - 1.0));
      smax = std::max(smax, std::max(std::abs(field.m1[k]), std::abs(field.m2[k])) / r + c);
    }
  }
  double dt = cfg.cfl * std::min(field.dx(), field.dy()) / smax;
  dt = std::min(dt, dt_cap);

  const std::vector<double> rho = field.rho;
  const std::vector<double> m1 = field.m1;
  const std::vector<double> m2 = field.m2;
  const double lx = dt / field.dx();
  const double ly = dt / field.dy();

  // x faces: face (i, j) sits between cells i-1 and i, i in [0, nx].
  std::vector<std::array<double, 3>> fx(static_cast<std::size_t>(nx + 1) * static_cast<std::size_t>(ny));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const std::size_t a = field.index(i - 1, j);
      const std::size_t b = field.index(i, j);
      fx[static_cast<std::size_t>(j) * static_cast<std::size_t>(nx + 1) + static_cast<std::size_t>(i)] =
          rusanov({rho[a], m1[a], m2[a]}, {rho[b], m1[b], m2[b]}, K, g);
    }
  }
  // y faces: face (i, j) sits between cells j-1 and j, j in [0, ny]; normal momentum is m2.
  std::vector<std::array<double, 3>> fy(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny + 1));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t a = field.index(i, j - 1);
      const std::size_t b = field.index(i, j);
      fy[static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i)] =
          rusanov({rho[a], m2[a], m1[a]}, {rho[b], m2[b], m1[b]}, K, g);
    }
  }

  StepInfo info;
  info.dt = dt;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const auto& w = fx[static_cast<std::size_t>(j) * static_cast<std::size_t>(nx + 1) + static_cast<std::size_t>(i)];
      const auto& e = fx[static_cast<std::size_t>(j) * static_cast<std::size_t>(nx + 1) + static_cast<std::size_t>(i + 1)];
      const auto& s = fy[static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i)];
      const auto& n = fy[static_cast<std::size_t>(j + 1) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i)];
      const std::size_t k = field.index(i, j);
      field.rho[k] = rho[k] - lx * (e[0] - w[0]) - ly * (n[0] - s[0]);
      field.m1[k] = m1[k] - lx * (e[1] - w[1]) - ly * (n[2] - s[2]);
      field.m2[k] = m2[k] - lx * (e[2] - w[2]) - ly * (n[1] - s[1]);
      require_finite(field, i, j, field.t + dt);
      if (field.rho[k] < cfg.rho_floor) {
        field.rho[k] = cfg.rho_floor;
        ++info.floored;
      }
    }
  }
  field.t += dt;
  field.floor_count += info.floored;
  fill_ghosts(field, boundary, field.t);
  return info;
}

std::size_t advance(ConservativeField& field, const FvConfig& cfg, const ExactField& boundary) {
  std::size_t steps = 0;
  while (field.t < cfg.t_end) {
    const double remaining = cfg.t_end - field.t;
    const StepInfo info = step(field, cfg, boundary, remaining);
    ++steps;
    if (info.dt >= remaining) field.t = cfg.t_end;
  }
  return steps;
}

ErrorRow compare(const ConservativeField& field, const ExactField& exact) {
  ErrorRow row;
  row.resolution = field.nx();
  const double cell = field.dx() * field.dy();
  for (int j = 0; j < field.ny(); ++j) {
    for (int i = 0; i < field.nx(); ++i) {
      const FlowSample e = exact(field.t, {field.x(i), field.y(j)});
      const std::size_t k = field.index(i, j);
      const double dr = std::abs(field.rho[k] - e.rho);
      const double d1 = std::abs(field.m1[k] - e.rho * e.u1);
      const double d2 = std::abs(field.m2[k] - e.rho * e.u2);
      row.l1_rho += dr * cell;
      row.linf_rho = std::max(row.linf_rho, dr);
      row.l1_momentum += (d1 + d2) * cell;
      row.linf_momentum = std::max(row.linf_momentum, std::max(d1, d2));
    }
  }
  row.floor_count = field.floor_count;
  return row;
}

namespace {

ErrorReport tabulate(const std::vector<int>& resolutions,
                     const std::function<ErrorRow(int)>& run_one) {
  if (resolutions.size() < 2) throw Error(ErrorCode::InvalidConfig, "need at least two resolutions");
  ErrorReport report;
  for (int n : resolutions) {
    ErrorRow row = run_one(n);
    if (!report.rows.empty()) {
      const ErrorRow& prev = report.rows.back();
      if (prev.l1_rho > 0.0 && row.l1_rho > 0.0 && n != prev.resolution) {
        row.order_l1_rho = std::log(prev.l1_rho / row.l1_rho) /
                           std::log(static_cast<double>(n) / prev.resolution);
      }
    }
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace

ErrorReport run_and_compare(const ExactField& exact, const FvConfig& cfg,
                            const std::vector<int>& resolutions) {
  return tabulate(resolutions, [&](int n) {
    FvConfig c = cfg;
    c.resolution = n;
    ConservativeField field = init_from_field(exact, c.t0, c);
    const std::size_t steps = advance(field, c, exact);
    ErrorRow row = compare(field, exact);
    row.steps = steps;
    return row;
  });
}

ErrorReport run_and_compare(const SolutionParams& params, const Trajectory& traj,
                            const FvConfig& cfg, const std::vector<int>& resolutions) {
  const ExactField exact = family_field(params, traj);
  return tabulate(resolutions, [&](int n) {
    FvConfig c = with_params(cfg, params);
    c.resolution = n;
    ConservativeField field = init_from_exact(params, traj, c.t0, c);
    const std::size_t steps = advance(field, c, exact);
    ErrorRow row = compare(field, exact);
    row.steps = steps;
    return row;
  });
}

ExactField riemann_tube(double rho_left, double rho_right, double x_split, double K, double gamma) {
  return [=](double /*t*/, const QueryPoint& q) {
    FlowSample s;
    s.rho = q.x < x_split ? rho_left : rho_right;
    s.p = K * std::pow(s.rho, gamma);
    return s;
  };
}

}  // namespace vortexflow
