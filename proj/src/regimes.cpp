#include "vortexflow/regimes.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <sstream>

namespace vortexflow {

const char* to_string(RegimeKind kind) noexcept {
  switch (kind) {
    case RegimeKind::Global: return "Global";
    case RegimeKind::TimePeriodic: return "TimePeriodic";
    case RegimeKind::Steady: return "Steady";
    case RegimeKind::FiniteTimeBlowup: return "FiniteTimeBlowup";
  }
  return "Unknown";
}

bool branch_consistent(const Regime& regime) {
  const std::string& b = regime.branch;
  switch (regime.kind) {
    case RegimeKind::TimePeriodic:
      return b == "1";
    case RegimeKind::Steady:
      return b == "1" || b == "2aI" || b == "3bI-global";
    case RegimeKind::FiniteTimeBlowup:
      return b == "2aII" || b == "2b-blowup" || b == "3bI-blowup" || b == "3bII-blowup";
    case RegimeKind::Global:
      return b == "1" || b == "2aI" || b == "2b-global" || b == "3a" || b == "3bI-global" ||
             b == "3bII-global";
  }
  return false;
}

namespace {

bool same_scale(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(a, b); }

// F_pot(b + d) - F_pot(b) without cancellation when |d| << b.
double potential_step(double b, double d, const SolutionParams& p) {
  const double g = p.gamma();
  const double xi2 = p.xi() * p.xi();
  const double a = b + d;
  // 1/a^2 - 1/b^2 factored so that tiny scales do not underflow.
  const double inv_sq = -(d / b) / a * (1.0 / a + 1.0 / b);
  const double e = 2.0 - 2.0 * g;
  const double pow_diff = std::pow(b, e) * std::expm1(e * std::log1p(d / b));
  return 0.5 * xi2 * inv_sq + p.lambda() / (-e) * pow_diff;
}

struct Extremum {
  double a;
  double f;
  bool representable;
};

// Potential extremum where xi^2/a^3 + lambda/a^(2gamma-1) = 0. Near gamma = 2 the location
// leaves the double range; a then saturates at 0 or inf and F_pot there at inf or 0.
Extremum potential_extremum(const SolutionParams& p) {
  const double g = p.gamma();
  const double xi2 = p.xi() * p.xi();
  const double log_a = std::log(-p.lambda() / xi2) / (2.0 * g - 4.0);
  const double a = std::exp(log_a);
  // At the extremum lambda/a^(2gamma-2) = -xi^2/a^2.
  const double f = xi2 * (g - 2.0) / (2.0 * (g - 1.0)) * std::exp(-2.0 * log_a);
  const bool ok = std::isnormal(a) && std::isfinite(a) && std::isnormal(f) && std::isfinite(f);
  return {a, f, ok};
}

const char* const kOutOfRange = "potential extremum lies outside the double range";

BlowupTime integrated_blowup_time(const SolutionParams& params) {
  IntegrationConfig cfg;
  for (double horizon = 16.0; horizon <= 1.1e6; horizon *= 16.0) {
    cfg.t_end = horizon;
    const Trajectory traj = integrate(params, cfg);
    require_no_step_failure(traj);
    if (traj.collapsed()) return {traj.event().t, traj.event().error_bar, false};
  }
  return {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), false};
}

template <class F>
double refine_root(F&& g, double lo, double hi) {
  std::uintmax_t max_iter = 200;
  auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-14 * std::min(std::abs(a), std::abs(b)); };
  const auto [l, r] = boost::math::tools::toms748_solve(g, lo, hi, tol, max_iter);
  return 0.5 * (l + r);
}

}  // namespace

CriticalData a_max_critical(const SolutionParams& params) {
  if (!(params.gamma() > 2.0) || !(params.lambda() < 0.0) || params.xi() == 0.0) {
    throw Error(ErrorCode::UndefinedCritical, "a_Max requires gamma > 2, lambda < 0, xi != 0");
  }
  const Extremum x = potential_extremum(params);
  CriticalData c;
  c.a_max = x.a;
  c.F_pot_at_a_max = x.f;
  return c;
}

Regime classify(const SolutionParams& params) {
  if (params.xi() == 0.0) {
    throw Error(ErrorCode::ZeroRotation, "classification requires a nonzero rotation constant");
  }
  const double g = params.gamma();
  const double a0 = params.a0();
  const double a1 = params.a1();
  const double xi2 = params.xi() * params.xi();
  const double lambda = params.lambda();

  Regime r;
  r.initial_energy = energy({0.0, a0, a1}, params);
  const double E0 = r.initial_energy.E;

  if (g < 2.0) {
    r.branch = "1";
    if (lambda < 0.0) {
      const Extremum x = potential_extremum(params);
      r.critical.a_eq = x.a;
      r.critical.F_pot_at_a_eq = x.f;
      if (!x.representable) r.note = kOutOfRange;
    }
    if (E0 < 0.0) {
      if (!r.note.empty()) {
        // Bound orbit whose turning points cannot be resolved in double precision.
        r.kind = RegimeKind::TimePeriodic;
        return r;
      }
      if (a1 == 0.0 && same_scale(a0, *r.critical.a_eq)) {
        r.kind = RegimeKind::Steady;
        return r;
      }
      const TurningPoints tp = turning_points(params);
      if (tp.a_min == tp.a_max) {
        r.kind = RegimeKind::Steady;
        return r;
      }
      r.kind = RegimeKind::TimePeriodic;
      r.a_min = tp.a_min;
      r.a_max_turning = tp.a_max;
      try {
        const PeriodEstimate pe = period_quadrature(params);
        r.period = pe.period;
        r.period_error = pe.error_estimate;
      } catch (const Error& e) {
        // The verdict stands on E(0) < 0 alone; only the period is missing.
        r.note = e.what();
      }
    } else {
      r.kind = RegimeKind::Global;
    }
    return r;
  }

  if (g == 2.0) {
    const double net = xi2 + lambda;
    if (net > 0.0 || (net == 0.0 && a1 >= 0.0)) {
      r.branch = "2aI";
      r.kind = (net == 0.0 && a1 == 0.0) ? RegimeKind::Steady : RegimeKind::Global;
      return r;
    }
    if (net == 0.0) {
      // a(t) = a0 + a1 t vanishes at -a0/a1, not at -a1/a0.
      r.branch = "2aII";
      r.kind = RegimeKind::FiniteTimeBlowup;
      r.blowup = BlowupTime{-a0 / a1, 0.0, true};
      std::ostringstream note;
      note.precision(17);
      note << "linear collapse a(t) = a0 + a1 t vanishes at -a0/a1 = " << -a0 / a1
           << "; the printed value -a1/a0 = " << -a1 / a0 << " is a suspected typo";
      r.note = note.str();
      return r;
    }
    const double threshold = std::sqrt(-lambda - xi2) / a0;
    r.critical.blowup_threshold = threshold;
    if (a1 < threshold) {
      r.branch = "2b-blowup";
      r.kind = RegimeKind::FiniteTimeBlowup;
      const auto tc = gamma2_collapse_time(params);
      r.blowup = BlowupTime{tc.value_or(std::numeric_limits<double>::infinity()), 0.0, true};
    } else {
      r.branch = "2b-global";
      r.kind = RegimeKind::Global;
    }
    return r;
  }

  if (lambda >= 0.0) {
    r.branch = "3a";
    r.kind = RegimeKind::Global;
    return r;
  }
  r.critical = a_max_critical(params);
  if (!potential_extremum(params).representable) r.note = kOutOfRange;
  const double a_max = *r.critical.a_max;
  const double f_max = *r.critical.F_pot_at_a_max;
  bool global = false;
  if (a0 >= a_max) {
    global = E0 <= f_max || (E0 > f_max && a1 >= 0.0);
    r.branch = global ? "3bI-global" : "3bI-blowup";
  } else {
    global = E0 >= f_max && a1 > 0.0;
    r.branch = global ? "3bII-global" : "3bII-blowup";
  }
  if (global) {
    r.kind = (a1 == 0.0 && a0 == a_max) ? RegimeKind::Steady : RegimeKind::Global;
  } else {
    r.kind = RegimeKind::FiniteTimeBlowup;
    r.blowup = integrated_blowup_time(params);
  }
  return r;
}

TurningPoints turning_points(const SolutionParams& params) {
  const double g = params.gamma();
  if (!(g > 1.0 && g < 2.0) || !(params.lambda() < 0.0) || params.xi() == 0.0) {
    throw Error(ErrorCode::NoBracket, "turning points need 1 < gamma < 2, lambda < 0, xi != 0");
  }
  const double E0 = energy({0.0, params.a0(), params.a1()}, params).E;
  if (!(E0 < 0.0)) throw Error(ErrorCode::NoBracket, "turning points need E(0) < 0");

  const Extremum x = potential_extremum(params);
  if (!x.representable) throw Error(ErrorCode::NoBracket, kOutOfRange);
  const double a_eq = x.a;
  const double f_eq = x.f;
  const double scale = std::max(std::abs(E0), std::abs(f_eq));
  if (E0 - f_eq <= 8.0 * std::numeric_limits<double>::epsilon() * scale) return {a_eq, a_eq};

  auto gap = [&](double a) { return potential(a, params) - E0; };

  double lo = std::min(a_eq, params.a0());
  for (int i = 0; gap(lo) < 0.0; ++i) {
    if (i > 2000) throw Error(ErrorCode::NoBracket, "inner turning point not bracketed");
    lo *= 0.5;
  }
  double hi = std::max(a_eq, params.a0());
  for (int i = 0; gap(hi) < 0.0; ++i) {
    if (i > 2000) throw Error(ErrorCode::NoBracket, "outer turning point not bracketed");
    hi *= 2.0;
  }

  TurningPoints tp;
  tp.a_min = gap(lo) == 0.0 ? lo : refine_root(gap, lo, a_eq);
  tp.a_max = gap(hi) == 0.0 ? hi : refine_root(gap, a_eq, hi);
  return tp;
}

PeriodEstimate period_quadrature(const SolutionParams& params) {
  const TurningPoints tp = turning_points(params);
  if (tp.a_min == tp.a_max) {
    throw Error(ErrorCode::DegenerateOrbit, "orbit sits at the potential minimum");
  }
  // Split at the potential minimum; each half is integrated in the distance d from its
  // turning point, with E0 - F(a) taken as a step from that point so it keeps its digits.
  const double split = std::clamp(potential_extremum(params).a, tp.a_min, tp.a_max);
  auto half = [&](double turn, double sign, double length, double& err, std::size_t& levels) {
    if (!(length > 0.0)) return 0.0;
    auto f = [&](double d) {
      const double gap = -potential_step(turn, sign * d, params);
      return 1.0 / std::sqrt(2.0 * std::max(gap, std::numeric_limits<double>::min()));
    };
    boost::math::quadrature::tanh_sinh<double> q;
    double e = 0.0;
    std::size_t lv = 0;
    double v = 0.0;
    try {
      v = q.integrate(f, 0.0, length, 1e-14, &e, nullptr, &lv);
    } catch (const std::exception& ex) {
      throw Error(ErrorCode::NonFiniteState, std::string("period quadrature failed: ") + ex.what());
    }
    err += e;
    levels = std::max(levels, lv);
    return v;
  };
  double err = 0.0;
  std::size_t levels = 0;
  const double lo = half(tp.a_min, 1.0, split - tp.a_min, err, levels);
  const double hi = half(tp.a_max, -1.0, tp.a_max - split, err, levels);
  return {2.0 * (lo + hi), 2.0 * err, static_cast<int>(levels)};
}

CertificationMismatchError::CertificationMismatchError(CertificationReport report)
    : Error(ErrorCode::CertificationMismatch,
            "symbolic verdict '" + report.symbolic_verdict + "' vs numeric verdict '" +
                report.numeric_verdict + "' (" + report.detail + ")"),
      report_(std::move(report)) {}

CertificationReport certify(const SolutionParams& params, const Regime& regime, double horizon,
                            const IntegrationConfig& base_cfg) {
  CertificationReport rep;
  rep.regime = regime;
  rep.horizon = horizon;
  rep.symbolic_verdict = std::string(to_string(regime.kind)) + " [" + regime.branch + "]";
  IntegrationConfig cfg = base_cfg;
  std::ostringstream detail;
  detail.precision(12);

  switch (regime.kind) {
    case RegimeKind::Global: {
      cfg.t_end = horizon;
      const Trajectory traj = integrate(params, cfg);
      require_no_step_failure(traj);
      if (traj.collapsed()) rep.observed_collapse = traj.event().t;
      rep.consistent = !traj.collapsed();
      rep.numeric_verdict = traj.collapsed() ? "collapse" : "no collapse up to horizon";
      detail << "integrated to t = " << traj.t_end();
      break;
    }
    case RegimeKind::Steady: {
      cfg.t_end = horizon;
      const Trajectory traj = integrate(params, cfg);
      require_no_step_failure(traj);
      double dev = 0.0;
      for (const auto& n : traj.nodes()) dev = std::max(dev, std::abs(n.a - params.a0()));
      rep.return_error = dev;
      rep.consistent = !traj.collapsed() && dev <= 1e-9;
      rep.numeric_verdict = rep.consistent ? "stays at equilibrium" : "leaves equilibrium";
      detail << "max |a - a0| = " << dev;
      break;
    }
    case RegimeKind::TimePeriodic: {
      const double T = regime.period.value_or(0.0);
      cfg.t_end = T;
      const Trajectory traj = integrate(params, cfg);
      require_no_step_failure(traj);
      if (traj.collapsed()) {
        rep.observed_collapse = traj.event().t;
        rep.numeric_verdict = "collapse";
        rep.consistent = false;
        break;
      }
      const ScaleState end = traj.at(traj.t_end());
      const double err = std::max(std::abs(end.a - params.a0()), std::abs(end.adot - params.a1()));
      rep.return_error = err;
      rep.consistent = err <= 1e-6;
      rep.numeric_verdict = rep.consistent ? "returns after T" : "does not return after T";
      detail << "|state(T) - state(0)| = " << err;
      break;
    }
    case RegimeKind::FiniteTimeBlowup: {
      const BlowupTime bt = regime.blowup.value_or(BlowupTime{});
      cfg.t_end = std::isfinite(bt.t_star) ? std::max(horizon, 2.0 * bt.t_star) : horizon;
      const Trajectory traj = integrate(params, cfg);
      require_no_step_failure(traj);
      if (!traj.collapsed()) {
        rep.numeric_verdict = "no collapse";
        rep.consistent = false;
        detail << "integrated to t = " << traj.t_end();
        break;
      }
      rep.observed_collapse = traj.event().t;
      const double tol = std::max(1e-6, bt.error_bar + traj.event().error_bar);
      const double miss = std::abs(traj.event().t - bt.t_star);
      rep.consistent = miss <= tol;
      rep.numeric_verdict = rep.consistent ? "collapse inside bracket" : "collapse outside bracket";
      detail << "observed t* = " << traj.event().t << ", reported " << bt.t_star << " +/- " << tol;
      break;
    }
  }
  rep.detail = detail.str();
  if (!rep.consistent) throw CertificationMismatchError(rep);
  return rep;
}

}  // namespace vortexflow
