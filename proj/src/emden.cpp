#include "vortexflow/emden.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace vortexflow {
namespace {

void require_positive_scale(double a) {
  if (!(a > 0.0)) throw Error(ErrorCode::CollapsedState, "scale a must be positive");
}

struct EmdenSystem {
  double xi2;
  double lambda;
  double gamma;

  [[nodiscard]] ode::Vec<1> accel(const ode::Vec<1>& q, const ode::Vec<1>& /*v*/) const {
    const double a = q[0];
    // Common factor 1/a^3 keeps the marginal gamma = 2 member free of cancellation noise.
    return {(xi2 + lambda * std::pow(a, 4.0 - 2.0 * gamma)) / (a * a * a)};
  }
};

}  // namespace

ScaleRate emden_rhs(const ScaleState& state, const SolutionParams& params) {
  require_positive_scale(state.a);
  const EmdenSystem sys{params.xi() * params.xi(), params.lambda(), params.gamma()};
  return {state.adot, sys.accel({state.a}, {state.adot})[0]};
}

double potential(double a, const SolutionParams& params) {
  require_positive_scale(a);
  const double g = params.gamma();
  const double xi = params.xi();
  return xi * xi / (2.0 * a * a) + params.lambda() / ((2.0 * g - 2.0) * std::pow(a, 2.0 * g - 2.0));
}

EnergySplit energy(const ScaleState& state, const SolutionParams& params) {
  EnergySplit e;
  e.F_pot = potential(state.a, params);
  e.F_kin = 0.5 * state.adot * state.adot;
  e.E = e.F_kin + e.F_pot;
  return e;
}

Trajectory::Trajectory(ode::DenseSolution<1> solution, const SolutionParams& params)
    : solution_(std::move(solution)) {
  nodes_.reserve(solution_.nodes().size());
  energies_.reserve(solution_.nodes().size());
  drift_.reserve(solution_.nodes().size());
  for (const auto& n : solution_.nodes()) {
    nodes_.push_back({n.t, n.q[0], n.v[0]});
    energies_.push_back(energy(nodes_.back(), params));
  }
  const double e0 = energies_.empty() ? 0.0 : energies_.front().E;
  const double scale = std::max(1.0, std::abs(e0));
  for (const auto& e : energies_) drift_.push_back(std::abs(e.E - e0) / scale);
}

ScaleState Trajectory::at(double t) const {
  const auto [q, v] = solution_.at(t);
  return {t, q[0], v[0]};
}

Trajectory integrate(const SolutionParams& params, const IntegrationConfig& cfg, double t0) {
  const EmdenSystem sys{params.xi() * params.xi(), params.lambda(), params.gamma()};
  auto solution = ode::integrate<1>(sys, t0, {params.a0()}, {params.a1()}, cfg);
  return Trajectory(std::move(solution), params);
}

void require_no_step_failure(const Trajectory& traj) {
  if (traj.event().kind != Termination::StepFailure) return;
  const ScaleState& last = traj.nodes().back();
  throw Error(ErrorCode::StepFailure,
              traj.event().message + "; last good state t = " + std::to_string(last.t) +
                  ", a = " + std::to_string(last.a) + ", adot = " + std::to_string(last.adot));
}

namespace {

struct Quadratic {
  double A;  // 2 E(0)
  double B;  // 2 a0 a1
  double C;  // a0^2
};

Quadratic gamma2_quadratic(const SolutionParams& params) {
  if (params.gamma() != 2.0) {
    throw Error(ErrorCode::InvalidConfig, "closed form exists only for gamma == 2");
  }
  const double a0 = params.a0();
  const double a1 = params.a1();
  const double xi2 = params.xi() * params.xi();
  return {a1 * a1 + (xi2 + params.lambda()) / (a0 * a0), 2.0 * a0 * a1, a0 * a0};
}

}  // namespace

std::optional<double> gamma2_collapse_time(const SolutionParams& params) {
  const auto [A, B, C] = gamma2_quadratic(params);
  if (A == 0.0) {
    if (B < 0.0) return -C / B;
    return std::nullopt;
  }
  const double disc = B * B - 4.0 * A * C;
  if (disc < 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  // Cancellation-free pair of roots.
  const double q = -0.5 * (B + std::copysign(sq, B));
  std::optional<double> best;
  for (double root : {q / A, q != 0.0 ? C / q : std::numeric_limits<double>::quiet_NaN()}) {
    if (std::isfinite(root) && root > 0.0 && (!best || root < *best)) best = root;
  }
  return best;
}

ScaleState closed_form_gamma2(const SolutionParams& params, double t) {
  const auto [A, B, C] = gamma2_quadratic(params);
  if (t > 0.0) {
    if (const auto tc = gamma2_collapse_time(params); tc && *tc <= t) {
      throw Error(ErrorCode::CollapsedAtOrBefore,
                  "quadratic a^2(t) vanishes at t = " + std::to_string(*tc));
    }
  }
  const double a2 = C + B * t + A * t * t;
  if (!(a2 > 0.0)) {
    throw Error(ErrorCode::CollapsedAtOrBefore, "quadratic a^2(t) is not positive at t");
  }
  const double a = std::sqrt(a2);
  return {t, a, (0.5 * B + A * t) / a};
}

double energy_drift(const Trajectory& traj) {
  double worst = 0.0;
  for (double d : traj.drift()) worst = std::max(worst, d);
  return worst;
}

std::optional<double> first_return_time(const Trajectory& traj) {
  const auto& nodes = traj.nodes();
  if (nodes.size() < 3) return std::nullopt;
  // Departure direction from the sign of the first velocity that leaves zero.
  double sigma = 0.0;
  std::size_t k = 1;
  for (; k < nodes.size(); ++k) {
    if (nodes[k].adot != 0.0) {
      sigma = nodes[k].adot > 0.0 ? 1.0 : -1.0;
      break;
    }
  }
  if (sigma == 0.0) return std::nullopt;

  bool reversed = false;
  for (; k + 1 < nodes.size(); ++k) {
    const double v0 = sigma * nodes[k].adot;
    const double v1 = sigma * nodes[k + 1].adot;
    if (v1 < 0.0) reversed = true;
    if (reversed && v0 < 0.0 && v1 >= 0.0) {
      double lo = nodes[k].t;
      double hi = nodes[k + 1].t;
      for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (sigma * traj.at(mid).adot < 0.0) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      return 0.5 * (lo + hi) - traj.t_begin();
    }
  }
  return std::nullopt;
}

}  // namespace vortexflow
