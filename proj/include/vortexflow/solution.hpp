#pragma once

// Exact self-similar vortical flows of the 2D isentropic Euler equations.
//
//   rho = max(base(s), 0)^(1/(gamma-1)) / a^2,   base(s) = -lambda (gamma-1) s / (2 K gamma) + alpha
//   u   = (adot/a) (x, y) + (xi/a^2) (-y, x),    s = (x^2 + y^2) / a^2
//   p   = K rho^gamma
//
// where a(t) solves the scale equation handled in emden.hpp.

#include <cmath>
#include <limits>
#include <string>

#include "vortexflow/error.hpp"

namespace vortexflow {

/// Unvalidated parameter record, as read from a preset, config file or flags.
struct RawParams {
  double gamma = 2.0;
  double K = 1.0;
  double xi = 1.0;
  double lambda = 0.0;
  double alpha = 1.0;
  double a0 = 1.0;
  double a1 = 0.0;
};

/// One validated member of the exact family. Only constructible through validate_params().
class SolutionParams {
 public:
  [[nodiscard]] double gamma() const noexcept { return raw_.gamma; }
  [[nodiscard]] double K() const noexcept { return raw_.K; }
  [[nodiscard]] double xi() const noexcept { return raw_.xi; }
  [[nodiscard]] double lambda() const noexcept { return raw_.lambda; }
  [[nodiscard]] double alpha() const noexcept { return raw_.alpha; }
  [[nodiscard]] double a0() const noexcept { return raw_.a0; }
  [[nodiscard]] double a1() const noexcept { return raw_.a1; }
  [[nodiscard]] const RawParams& raw() const noexcept { return raw_; }

  /// Same parameters with a different initial condition (a0, a1); revalidated.
  [[nodiscard]] SolutionParams with_initial(double a0, double a1) const;

 private:
  friend SolutionParams validate_params(const RawParams& raw);
  explicit SolutionParams(const RawParams& raw) : raw_(raw) {}
  RawParams raw_;
};

/// Checks gamma > 1, K > 0, a0 > 0, alpha >= 0. Throws ParamError listing every violation.
SolutionParams validate_params(const RawParams& raw);

struct ScaleState {
  double t = 0.0;
  double a = 1.0;
  double adot = 0.0;
};

struct QueryPoint {
  double x = 0.0;
  double y = 0.0;

  [[nodiscard]] double r() const noexcept { return std::hypot(x, y); }
  [[nodiscard]] double s(const ScaleState& state) const noexcept {
    return (x * x + y * y) / (state.a * state.a);
  }
};

struct FlowSample {
  double rho = 0.0;
  double u1 = 0.0;
  double u2 = 0.0;
  double p = 0.0;
};

struct ProfileEval {
  double s = 0.0;
  double f = 0.0;
};

/// Density profile f(s); the linear base is clamped at zero before the fractional power.
ProfileEval profile_f(double s, const SolutionParams& params);

/// Value of s where the profile vanishes, or +inf when lambda (gamma-1) <= 0.
double support_boundary_s(const SolutionParams& params);

/// Radius beyond which the density vanishes at the given state, or +inf.
double support_radius(const SolutionParams& params, const ScaleState& state);

FlowSample eval_flow(const SolutionParams& params, const ScaleState& state, const QueryPoint& q);

/// The gamma = 2 rotational field rho = r^2/(8 K t^2), u = ((x+y), (x-y)) / (2t), evaluated
/// exactly as printed in the literature. Independent of eval_flow.
FlowSample zhang_zheng_field(double t, const QueryPoint& q, double K);

struct ZhangZhengEmbedding {
  SolutionParams params;
  ScaleState state;  // at t = 1, scale a = sqrt(t)
  /// The family member with xi = -1/2 equals the printed field evaluated at the
  /// diagonal mirror (y, x); density and speed agree pointwise without mirroring.
  std::string chirality_note;
};

ZhangZhengEmbedding zhang_zheng_embedding(double K);

/// Point at which the printed gamma = 2 field must be evaluated to reproduce the embedded
/// family member at q.
inline QueryPoint embedding_mirror(const QueryPoint& q) noexcept { return {q.y, q.x}; }

/// Scale state of the embedding at time t > 0 (a = sqrt(t), adot = 1/(2 sqrt(t))).
ScaleState zhang_zheng_scale(double t);

}  // namespace vortexflow
