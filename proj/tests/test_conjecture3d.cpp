#include <doctest.h>

#include <boost/numeric/odeint.hpp>
#include <cmath>

#include "vortexflow/conjecture3d.hpp"
#include "vortexflow/presets.hpp"

using namespace vortexflow;

namespace {

const std::vector<double> kLadder{2e-3, 1e-3, 5e-4};

IntegrationConfig tight(double t_end) {
  IntegrationConfig cfg;
  cfg.t_end = t_end;
  cfg.rel_tol = cfg.abs_tol = 1e-13;
  cfg.max_step = 0.01;
  return cfg;
}

}  // namespace

TEST_CASE("isotropic start keeps the axes equal") {
  Conjecture3DParams c;
  c.gamma = 1.4;
  c.xi3 = 1.3;
  const ScaleTrajectory3D traj = integrate_scales_3d(c, 3.0);
  REQUIRE(traj.event().kind == Termination::ReachedEnd);
  for (const auto& n : traj.nodes()) {
    CHECK(std::abs(n.q[0] - n.q[1]) <= 1e-10);
    CHECK(std::abs(n.q[0] - n.q[2]) <= 1e-10);
    CHECK(std::abs(n.v[0] - n.v[2]) <= 1e-10);
  }
}

TEST_CASE("isotropic reduction against an independent scalar integration") {
  Conjecture3DParams c;
  c.gamma = 5.0 / 3.0;
  c.xi3 = 1.0;
  const double t_end = 2.0;
  const ScaleTrajectory3D traj = integrate_scales_3d(c, t_end, tight(t_end));

  // a'' = 1/a^(3 gamma - 2) integrated with a different scheme.
  using State = std::array<double, 2>;
  const double e = 3.0 * c.gamma - 2.0;
  auto rhs = [e](const State& y, State& dy, double) {
    dy[0] = y[1];
    dy[1] = std::pow(y[0], -e);
  };
  namespace odeint = boost::numeric::odeint;
  auto stepper = odeint::make_dense_output(1e-13, 1e-13, odeint::runge_kutta_dopri5<State>());
  for (int k = 1; k <= 20; ++k) {
    const double t = t_end * k / 20.0;
    State y{1.0, 0.0};
    odeint::integrate_adaptive(stepper, rhs, y, 0.0, t, 1e-3);
    const Scale3D s = traj.at(t);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(s.a[static_cast<std::size_t>(i)] - y[0]) <= 1e-8);
  }
}

TEST_CASE("zero separation constant gives linear axes") {
  Conjecture3DParams c;
  c.xi3 = 0.0;
  c.a0 = {1.0, 1.5, 0.7};
  c.a1 = {0.2, -0.1, 0.4};
  const ScaleTrajectory3D traj = integrate_scales_3d(c, 2.0);
  for (double t : {0.0, 0.3, 1.1, 2.0}) {
    const Scale3D s = traj.at(t);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(std::abs(s.a[i] - (c.a0[i] + c.a1[i] * t)) <= 1e-12);
      CHECK(std::abs(s.adot[i] - c.a1[i]) <= 1e-12);
    }
  }
}

TEST_CASE("first integral is conserved along the coupled system") {
  const Conjecture3DParams c = preset_3d("anisotropic-drift");
  const ScaleTrajectory3D traj = integrate_scales_3d(c, 3.0);
  CHECK(traj.max_invariant_drift() <= 1e-9);
  const Scale3D s0 = traj.at(0.0);
  const Scale3D s1 = traj.at(3.0);
  const double e0 = first_integral_3d(c, s0.a, s0.adot);
  CHECK(std::abs(first_integral_3d(c, s1.a, s1.adot) - e0) <= 1e-9 * std::abs(e0));
}

TEST_CASE("density and velocity of the candidate family") {
  Conjecture3DParams c = preset_3d("anisotropic-drift");
  const Scale3D s = integrate_scales_3d(c, 1.0).at(0.0);
  const Vec3 centre{c.d0[0], c.d0[1], c.d0[2]};
  const Sample3D at_centre = eval_flow_3d(c, s, centre);
  CHECK(at_centre.rho == doctest::Approx(std::pow(c.alpha3, 1.0 / (c.gamma - 1.0)) /
                                         (c.a0[0] * c.a0[1] * c.a0[2])));
  for (std::size_t i = 0; i < 3; ++i) CHECK(at_centre.u[i] == doctest::Approx(c.d1[i]));
  CHECK(at_centre.p == doctest::Approx(c.K * std::pow(at_centre.rho, c.gamma)));
}

TEST_CASE("named cases") {
  ConjectureReport iso = check_conjecture_3d(preset_3d("isotropic"), 0.5, Grid3DSpec{}, kLadder);
  CHECK(iso.pass);
  CHECK(iso.finest.normalized_max() <= 1e-6);
  REQUIRE(iso.convergence.order);
  CHECK(*iso.convergence.order >= 1.5);

  ConjectureReport drift = check_conjecture_3d(preset_3d("pure-drift"), 0.5, Grid3DSpec{}, kLadder);
  CHECK(drift.pass);
  CHECK(drift.finest.normalized_max() <= 1e-8);

  // The open case: the verdict must be definitive and carry convergence evidence.
  ConjectureReport aniso = check_conjecture_3d(preset_3d("anisotropic-drift"), 0.5, Grid3DSpec{}, kLadder);
  CHECK((aniso.verdict == "PASS" || aniso.verdict.rfind("FAIL", 0) == 0));
  CHECK(aniso.pass == (aniso.verdict == "PASS"));
  CHECK(aniso.convergence.residual.size() == kLadder.size());
  CHECK((aniso.convergence.order || aniso.convergence.not_applicable));
  CHECK(!aniso.note.empty());
  MESSAGE("anisotropic-drift: " << aniso.verdict << " residual " << aniso.finest.normalized_max());
}

TEST_CASE("inconsistent scales fail the harness") {
  // Density and velocity from one separation constant, scales driven by another.
  const Conjecture3DParams c = preset_3d("isotropic");
  Conjecture3DParams other = c;
  other.xi3 = 1.5 * c.xi3;
  const ScaleTrajectory3D good_traj = integrate_scales_3d(c, 1.0, tight(1.0));
  const ScaleTrajectory3D bad_traj = integrate_scales_3d(other, 1.0, tight(1.0));
  const ResidualReport good = euler_residual_3d(c, good_traj, 0.5, Grid3DSpec{});
  const ResidualReport bad = euler_residual_3d(c, bad_traj, 0.5, Grid3DSpec{});
  CHECK(bad.normalized_max() >= 100.0 * good.normalized_max());
}

TEST_CASE("permuting axes permutes the residuals") {
  Conjecture3DParams c = preset_3d("anisotropic-drift");
  const std::array<int, 3> perm{2, 0, 1};
  const Conjecture3DParams q = c.permuted(perm);
  CHECK(q.a0[0] == c.a0[2]);
  CHECK(q.d1[1] == c.d1[0]);
  const ScaleTrajectory3D tc = integrate_scales_3d(c, 1.0, tight(1.0));
  const ScaleTrajectory3D tq = integrate_scales_3d(q, 1.0, tight(1.0));
  Grid3DSpec g;
  const ResidualReport rc = euler_residual_3d(c, tc, 0.5, g);
  const ResidualReport rq = euler_residual_3d(q, tq, 0.5, g);
  const char* axis[3] = {"momentum-x", "momentum-y", "momentum-z"};
  CHECK(std::abs(rq.equation("mass").normalized_max - rc.equation("mass").normalized_max) <= 1e-13);
  for (int i = 0; i < 3; ++i) {
    const double a = rq.equation(axis[i]).normalized_max;
    const double b = rc.equation(axis[perm[static_cast<std::size_t>(i)]]).normalized_max;
    CHECK(std::abs(a - b) <= 1e-13);
  }
}

TEST_CASE("validation and grid errors") {
  Conjecture3DParams c;
  c.gamma = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = Conjecture3DParams{};
  c.a0 = {1.0, 0.0, 1.0};
  CHECK_THROWS_AS(c.validate(), Error);
  Grid3DSpec g;
  g.h = -1.0;
  CHECK_THROWS_AS(g.validate(), Error);
  g = Grid3DSpec{};
  g.half_width = {5.0, 5.0, 5.0};
  c = preset_3d("isotropic");
  const ScaleTrajectory3D traj = integrate_scales_3d(c, 1.0);
  try {
    (void)euler_residual_3d(c, traj, 0.5, g);
    FAIL("expected GridTouchesSupportBoundary");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GridTouchesSupportBoundary);
  }
  try {
    (void)euler_residual_3d(c, traj, 1.0, Grid3DSpec{});
    FAIL("expected TrajectoryTooShort");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TrajectoryTooShort);
  }
  CHECK_THROWS_AS(preset_3d("nope"), Error);
}
