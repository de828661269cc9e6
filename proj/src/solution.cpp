#include "vortexflow/solution.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace vortexflow {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonPositiveGammaMargin: return "NonPositiveGammaMargin";
    case ErrorCode::NonPositiveK: return "NonPositiveK";
    case ErrorCode::NonPositiveA0: return "NonPositiveA0";
    case ErrorCode::NegativeAlpha: return "NegativeAlpha";
    case ErrorCode::NonFiniteParameter: return "NonFiniteParameter";
    case ErrorCode::CollapsedState: return "CollapsedState";
    case ErrorCode::NonPositiveTime: return "NonPositiveTime";
    case ErrorCode::CollapsedAtOrBefore: return "CollapsedAtOrBefore";
    case ErrorCode::StepFailure: return "StepFailure";
    case ErrorCode::OutOfSpan: return "OutOfSpan";
    case ErrorCode::ZeroRotation: return "ZeroRotation";
    case ErrorCode::UndefinedCritical: return "UndefinedCritical";
    case ErrorCode::NoBracket: return "NoBracket";
    case ErrorCode::DegenerateOrbit: return "DegenerateOrbit";
    case ErrorCode::CertificationMismatch: return "CertificationMismatch";
    case ErrorCode::GridTouchesSupportBoundary: return "GridTouchesSupportBoundary";
    case ErrorCode::TrajectoryTooShort: return "TrajectoryTooShort";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::LadderTooShort: return "LadderTooShort";
    case ErrorCode::BoxOutsideSupport: return "BoxOutsideSupport";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

namespace {

std::string join_codes(const std::vector<ErrorCode>& codes) {
  std::string out;
  for (const auto code : codes) {
    if (!out.empty()) out += ", ";
    out += to_string(code);
  }
  return out;
}

}  // namespace

ParamError::ParamError(std::vector<ErrorCode> violations)
    : Error(violations.empty() ? ErrorCode::InvalidConfig : violations.front(),
            "invalid parameters [" + join_codes(violations) + "]"),
      violations_(std::move(violations)) {}

SolutionParams validate_params(const RawParams& raw) {
  std::vector<ErrorCode> violations;
  for (double v : {raw.gamma, raw.K, raw.xi, raw.lambda, raw.alpha, raw.a0, raw.a1}) {
    if (!std::isfinite(v)) {
      violations.push_back(ErrorCode::NonFiniteParameter);
      break;
    }
  }
  if (!(raw.gamma > 1.0)) violations.push_back(ErrorCode::NonPositiveGammaMargin);
  if (!(raw.K > 0.0)) violations.push_back(ErrorCode::NonPositiveK);
  if (!(raw.a0 > 0.0)) violations.push_back(ErrorCode::NonPositiveA0);
  if (!(raw.alpha >= 0.0)) violations.push_back(ErrorCode::NegativeAlpha);
  if (!violations.empty()) throw ParamError(std::move(violations));
  return SolutionParams(raw);
}

SolutionParams SolutionParams::with_initial(double a0, double a1) const {
  RawParams r = raw_;
  r.a0 = a0;
  r.a1 = a1;
  return validate_params(r);
}

ProfileEval profile_f(double s, const SolutionParams& params) {
  const double g = params.gamma();
  const double slope = -params.lambda() * (g - 1.0) / (2.0 * params.K() * g);
  const double base = std::max(slope * s + params.alpha(), 0.0);
  return {s, std::pow(base, 1.0 / (g - 1.0))};
}

double support_boundary_s(const SolutionParams& params) {
  const double g = params.gamma();
  if (params.lambda() * (g - 1.0) <= 0.0) return std::numeric_limits<double>::infinity();
  return 2.0 * params.K() * g * params.alpha() / (params.lambda() * (g - 1.0));
}

double support_radius(const SolutionParams& params, const ScaleState& state) {
  const double sb = support_boundary_s(params);
  if (std::isinf(sb)) return sb;
  return state.a * std::sqrt(sb);
}

FlowSample eval_flow(const SolutionParams& params, const ScaleState& state, const QueryPoint& q) {
  if (!(state.a > 0.0)) {
    throw Error(ErrorCode::CollapsedState, "scale a must be positive for field evaluation");
  }
  const double a2 = state.a * state.a;
  const double expansion = state.adot / state.a;
  const double swirl = params.xi() / a2;

  FlowSample out;
  out.rho = profile_f(q.s(state), params).f / a2;
  out.u1 = expansion * q.x - swirl * q.y;
  out.u2 = swirl * q.x + expansion * q.y;
  out.p = params.K() * std::pow(out.rho, params.gamma());
  return out;
}

FlowSample zhang_zheng_field(double t, const QueryPoint& q, double K) {
  if (!(t > 0.0)) throw Error(ErrorCode::NonPositiveTime, "field defined for t > 0 only");
  const double r2 = q.x * q.x + q.y * q.y;
  FlowSample out;
  out.rho = r2 / (8.0 * K * t * t);
  out.u1 = (q.x + q.y) / (2.0 * t);
  out.u2 = (q.x - q.y) / (2.0 * t);
  out.p = K * out.rho * out.rho;
  return out;
}

ScaleState zhang_zheng_scale(double t) {
  if (!(t > 0.0)) throw Error(ErrorCode::NonPositiveTime, "embedding scale defined for t > 0 only");
  const double a = std::sqrt(t);
  return {t, a, 0.5 / a};
}

ZhangZhengEmbedding zhang_zheng_embedding(double K) {
  // a = c sqrt(t) with c = 1; (xi^2 + lambda) = -c^4/4 and f(s) = s/(8K) require
  // lambda = -1/2 and xi^2 = 1/4.
  RawParams raw;
  raw.gamma = 2.0;
  raw.K = K;
  raw.xi = -0.5;
  raw.lambda = -0.5;
  raw.alpha = 0.0;
  raw.a0 = 1.0;
  raw.a1 = 0.5;
  return {validate_params(raw), ScaleState{1.0, 1.0, 0.5},
          "xi = -1/2 member; (a0, a1) are the scale state at field time t = 1, so integration "
          "time tau corresponds to t = 1 + tau. Velocity equals the printed field evaluated at the "
          "mirrored point (y, x); density and speed agree without mirroring. The printed velocity "
          "itself does not satisfy the mass equation."};
}

}  // namespace vortexflow
