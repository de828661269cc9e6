#pragma once

// Dimension-generic pointwise residual of the isentropic Euler / Navier-Stokes system.
// Internal to the library.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "vortexflow/error.hpp"
#include "vortexflow/ode.hpp"
#include "vortexflow/residual.hpp"

namespace vortexflow::detail {

template <std::size_t D>
using Point = std::array<double, D>;

template <std::size_t D>
struct Sample {
  double rho = 0.0;
  std::array<double, D> u{};
};

template <std::size_t D>
using Field = std::function<Sample<D>(double, const Point<D>&)>;

// Central first derivative from values at x-2h, x-h, x+h, x+2h.
inline double central_diff(double m2, double m1, double p1, double p2, double h, int order) {
  if (order == 2) return (p1 - m1) / (2.0 * h);
  return (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h);
}

struct ResidualOptions {
  double h = 1e-3;
  double h_t = 1e-3;
  int fd_order = 4;
  double K = 1.0;
  double gamma = 2.0;
  double mu = 0.0;
  double viscous_h = 0.0625;
};

template <std::size_t D>
ResidualReport residual_core(const Field<D>& field, const Field<D>* time_derivative, double t,
                             const std::vector<Point<D>>& points, const ResidualOptions& opt) {
  static const char* const axis_names[3] = {"momentum-x", "momentum-y", "momentum-z"};
  constexpr std::size_t n_eq = D + 1;
  const std::size_t n = points.size();
  if (n == 0) throw Error(ErrorCode::InvalidGrid, "empty sampling grid");

  std::vector<std::array<double, n_eq>> res(n);
  std::array<double, n_eq> scale{};
  double viscous_max = 0.0;
  std::array<double, D> viscous_scale_max{};

  auto pressure = [&](double rho) { return opt.K * std::pow(rho, opt.gamma); };

  for (std::size_t ip = 0; ip < n; ++ip) {
    const Point<D>& x = points[ip];
    const Sample<D> c = field(t, x);

    double rho_t = 0.0;
    std::array<double, D> u_t{};
    if (time_derivative != nullptr) {
      const Sample<D> d = (*time_derivative)(t, x);
      rho_t = d.rho;
      u_t = d.u;
    } else {
      const Sample<D> fp = field(t + opt.h_t, x);
      const Sample<D> fm = field(t - opt.h_t, x);
      rho_t = (fp.rho - fm.rho) / (2.0 * opt.h_t);
      for (std::size_t j = 0; j < D; ++j) u_t[j] = (fp.u[j] - fm.u[j]) / (2.0 * opt.h_t);
    }

    // d_k(rho u_k), d_k u_j, d_k p
    std::array<double, D> div_flux{};
    std::array<std::array<double, D>, D> grad_u{};  // grad_u[k][j] = d_k u_j
    std::array<double, D> grad_p{};
    for (std::size_t k = 0; k < D; ++k) {
      std::array<Sample<D>, 4> s;
      const double offsets[4] = {-2.0, -1.0, 1.0, 2.0};
      for (int m = 0; m < 4; ++m) {
        if (opt.fd_order == 2 && (m == 0 || m == 3)) continue;
        Point<D> xs = x;
        xs[k] += offsets[m] * opt.h;
        s[static_cast<std::size_t>(m)] = field(t, xs);
      }
      div_flux[k] = central_diff(s[0].rho * s[0].u[k], s[1].rho * s[1].u[k], s[2].rho * s[2].u[k],
                                 s[3].rho * s[3].u[k], opt.h, opt.fd_order);
      for (std::size_t j = 0; j < D; ++j) {
        grad_u[k][j] = central_diff(s[0].u[j], s[1].u[j], s[2].u[j], s[3].u[j], opt.h, opt.fd_order);
      }
      grad_p[k] = central_diff(pressure(s[0].rho), pressure(s[1].rho), pressure(s[2].rho),
                               pressure(s[3].rho), opt.h, opt.fd_order);
    }

    std::array<double, D> lap{};
    if (opt.mu != 0.0) {
      const double hv = opt.viscous_h;
      for (std::size_t k = 0; k < D; ++k) {
        Point<D> xp = x;
        Point<D> xm = x;
        xp[k] += hv;
        xm[k] -= hv;
        const Sample<D> sp = field(t, xp);
        const Sample<D> sm = field(t, xm);
        for (std::size_t j = 0; j < D; ++j) lap[j] += (sp.u[j] - 2.0 * c.u[j] + sm.u[j]) / (hv * hv);
      }
    }

    const double mass = rho_t + ode::ordered_sum(div_flux);
    double mass_scale = std::abs(rho_t);
    for (std::size_t k = 0; k < D; ++k) mass_scale = std::max(mass_scale, std::abs(div_flux[k]));
    res[ip][0] = mass;
    scale[0] = std::max(scale[0], mass_scale);

    for (std::size_t j = 0; j < D; ++j) {
      std::array<double, D> adv{};
      double term_scale = std::abs(c.rho * u_t[j]);
      for (std::size_t k = 0; k < D; ++k) {
        adv[k] = c.u[k] * grad_u[k][j];
        term_scale = std::max(term_scale, std::abs(c.rho * adv[k]));
      }
      const double accel = u_t[j] + ode::ordered_sum(adv);
      const double visc = opt.mu * lap[j];
      term_scale = std::max(term_scale, std::abs(grad_p[j]));
      res[ip][j + 1] = c.rho * accel + grad_p[j] - visc;
      scale[j + 1] = std::max(scale[j + 1], term_scale);
      viscous_scale_max[j] = std::max(viscous_scale_max[j], std::abs(visc));
    }
  }

  ResidualReport report;
  report.n_points = n;
  report.h = opt.h;
  report.h_t = opt.h_t;
  for (std::size_t e = 0; e < n_eq; ++e) {
    EquationResidual eq;
    eq.name = e == 0 ? "mass" : axis_names[e - 1];
    eq.scale = scale[e];
    double sum = 0.0;
    std::size_t worst = 0;
    for (std::size_t ip = 0; ip < n; ++ip) {
      const double r = std::abs(res[ip][e]);
      sum += r;
      if (r > eq.max_abs) {
        eq.max_abs = r;
        worst = ip;
      }
    }
    eq.mean_abs = sum / static_cast<double>(n);
    eq.normalized_max = eq.scale > 0.0 ? eq.max_abs / eq.scale : 0.0;
    eq.normalized_mean = eq.scale > 0.0 ? eq.mean_abs / eq.scale : 0.0;
    eq.where.assign(points[worst].begin(), points[worst].end());
    report.equations.push_back(std::move(eq));
  }
  for (std::size_t j = 0; j < D; ++j) {
    if (scale[j + 1] > 0.0) viscous_max = std::max(viscous_max, viscous_scale_max[j] / scale[j + 1]);
  }
  report.viscous_normalized_max = viscous_max;
  return report;
}

}  // namespace vortexflow::detail
