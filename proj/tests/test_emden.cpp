#include <doctest.h>

#include <cmath>
#include <random>

#include "vortexflow/emden.hpp"

using namespace vortexflow;

namespace {

SolutionParams make(double gamma, double xi, double lambda, double a0, double a1) {
  return validate_params({gamma, 1.0, xi, lambda, 1.0, a0, a1});
}

IntegrationConfig span(double t_end) {
  IntegrationConfig cfg;
  cfg.t_end = t_end;
  return cfg;
}

// Independent gamma = 2 oracle: (a^2)'' = 4E with E = a1^2/2 + (xi^2 + lambda)/(2 a0^2).
double oracle_a_gamma2(double xi, double lambda, double a0, double a1, double t) {
  const double e2 = a1 * a1 + (xi * xi + lambda) / (a0 * a0);
  return std::sqrt(a0 * a0 + 2.0 * a0 * a1 * t + e2 * t * t);
}

}  // namespace

TEST_CASE("emden_rhs values") {
  CHECK(emden_rhs({0.0, 1.0, 0.3}, make(2.0, 1.0, 0.0, 1.0, 0.0)).addot == doctest::Approx(1.0));
  CHECK(emden_rhs({0.0, 1.0, 0.3}, make(2.0, 1.0, 0.0, 1.0, 0.0)).adot == 0.3);
  // Both terms equal 8 at the equilibrium a = 1/2.
  const auto p = make(1.5, 1.0, -2.0, 1.0, 0.0);
  CHECK(std::pow(0.5, -3.0) == doctest::Approx(8.0));
  CHECK(2.0 / std::pow(0.5, 2.0 * 1.5 - 1.0) == doctest::Approx(8.0));
  CHECK(std::abs(emden_rhs({0.0, 0.5, 0.0}, p).addot) <= 1e-13);
  CHECK(std::abs(emden_rhs({0.0, 1.0, 0.0}, make(3.0, 1.0, -1.0, 1.0, 0.0)).addot) <= 1e-15);
  CHECK_THROWS_AS(emden_rhs({0.0, 0.0, 0.0}, p), Error);
}

TEST_CASE("energy values and split") {
  EnergySplit e = energy({0.0, 1.0, 0.0}, make(1.5, 1.0, -2.0, 1.0, 0.0));
  CHECK(e.E == doctest::Approx(-1.5));
  e = energy({0.0, 1.0, 0.0}, make(2.0, 1.0, 0.0, 1.0, 0.0));
  CHECK(e.E == doctest::Approx(0.5));
  e = energy({0.0, 1.0, 0.0}, make(3.0, 1.0, -1.0, 1.0, 0.0));
  CHECK(e.E == doctest::Approx(0.25));
  e = energy({0.0, 0.7, -1.3}, make(1.4, 0.7, 0.9, 1.0, 0.0));
  CHECK(e.E == e.F_kin + e.F_pot);
  CHECK(e.F_kin == doctest::Approx(0.5 * 1.69));
  CHECK_THROWS_AS(energy({0.0, -1.0, 0.0}, make(1.4, 0.7, 0.9, 1.0, 0.0)), Error);
}

TEST_CASE("integrate: gamma = 2 expansion against the quadratic oracle") {
  const Trajectory traj = integrate(make(2.0, 1.0, 0.0, 1.0, 0.0), span(2.0));
  CHECK(traj.event().kind == Termination::ReachedEnd);
  CHECK(std::abs(traj.at(2.0).a - std::sqrt(5.0)) <= 1e-8);
  for (int k = 0; k <= 40; ++k) {
    const double t = 0.05 * k;
    CHECK(std::abs(traj.at(t).a - std::sqrt(1.0 + t * t)) <= 1e-8);
  }
}

TEST_CASE("integrate: collapse located at t* = 1") {
  const Trajectory traj = integrate(make(2.0, 1.0, -2.0, 1.0, 0.0), span(5.0));
  CHECK(traj.collapsed());
  CHECK(std::abs(traj.event().t - 1.0) <= 1e-6);
  CHECK(traj.event().error_bar >= 0.0);
  for (const auto& n : traj.nodes()) CHECK(n.a > 0.0);
}

TEST_CASE("integrate: equilibrium stays put") {
  const Trajectory traj = integrate(make(1.5, 1.0, -2.0, 0.5, 0.0), span(20.0));
  for (const auto& n : traj.nodes()) CHECK(std::abs(n.a - 0.5) <= 1e-9);
  CHECK(energy_drift(traj) <= 1e-14);
}

TEST_CASE("integrate honours the start time") {
  const auto p = make(2.0, 1.0, 0.0, 1.0, 0.0);
  const Trajectory traj = integrate(p, span(1.0), 3.0);
  CHECK(traj.t_begin() == 3.0);
  CHECK(traj.t_end() == doctest::Approx(4.0));
  CHECK(std::abs(traj.at(4.0).a - std::sqrt(2.0)) <= 1e-8);
}

TEST_CASE("closed_form_gamma2") {
  ScaleState s = closed_form_gamma2(make(2.0, 1.0, 0.0, 1.0, 0.0), 1.0);
  CHECK(s.a == doctest::Approx(std::sqrt(2.0)));
  CHECK(s.adot == doctest::Approx(1.0 / std::sqrt(2.0)));
  s = closed_form_gamma2(make(2.0, 1.0, -2.0, 1.0, 0.0), 1.0 - 1e-8);
  CHECK(s.a < 2e-4);
  for (double t : {0.0, 0.5, 3.0, 100.0}) {
    s = closed_form_gamma2(make(2.0, 1.0, -1.0, 1.0, 0.0), t);
    CHECK(s.a == 1.0);
    CHECK(s.adot == 0.0);
  }
  try {
    (void)closed_form_gamma2(make(2.0, 1.0, -2.0, 1.0, 0.0), 1.5);
    FAIL("expected CollapsedAtOrBefore");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CollapsedAtOrBefore);
  }
  CHECK(gamma2_collapse_time(make(2.0, 1.0, -2.0, 1.0, 0.0)).value() == doctest::Approx(1.0));
  CHECK(gamma2_collapse_time(make(2.0, 1.0, -1.0, 1.0, -0.5)).value() == doctest::Approx(2.0));
  CHECK(!gamma2_collapse_time(make(2.0, 1.0, 0.0, 1.0, 0.0)));
}

TEST_CASE("energy drift stays small") {
  const auto periodic = make(1.5, 1.0, -2.0, 1.0, 0.0);
  CHECK(energy_drift(integrate(periodic, span(2.5))) <= 1e-9);
  CHECK(energy_drift(integrate(make(2.0, 1.0, 0.0, 1.0, 0.0), span(2.0))) <= 1e-9);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> g(1.1, 3.5);
  std::uniform_real_distribution<double> xi(0.3, 2.0);
  std::uniform_real_distribution<double> lam(-1.0, 2.0);
  std::uniform_real_distribution<double> a1(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const auto p = make(g(rng), xi(rng), lam(rng), 1.0, a1(rng));
    const Trajectory traj = integrate(p, span(5.0));
    if (traj.collapsed()) continue;
    CHECK(energy_drift(traj) <= 100.0 * IntegrationConfig{}.rel_tol);
  }
}

TEST_CASE("gamma = 2 oracle equivalence on 20 random members") {
  std::mt19937_64 rng(20);
  std::uniform_real_distribution<double> xi(-2.0, 2.0);
  std::uniform_real_distribution<double> lam(-1.0, 2.0);
  std::uniform_real_distribution<double> a0(0.5, 2.0);
  std::uniform_real_distribution<double> a1(-0.5, 1.0);
  int tested = 0;
  while (tested < 20) {
    const double x = xi(rng), l = lam(rng), b0 = a0(rng), b1 = a1(rng);
    const double t_end = 3.0;
    // Keep members whose quadratic stays positive on [0, t_end] with margin.
    double min_sq = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 300; ++k) {
      const double a = oracle_a_gamma2(x, l, b0, b1, t_end * k / 300.0);
      min_sq = std::min(min_sq, a * a);
    }
    if (!(min_sq > 0.05)) continue;
    ++tested;
    const Trajectory traj = integrate(make(2.0, x, l, b0, b1), span(t_end));
    REQUIRE(traj.event().kind == Termination::ReachedEnd);
    for (const auto& n : traj.nodes()) CHECK(std::abs(n.a - oracle_a_gamma2(x, l, b0, b1, n.t)) <= 1e-8);
    for (int k = 0; k <= 30; ++k) {
      const double t = t_end * k / 30.0;
      CHECK(std::abs(traj.at(t).a - oracle_a_gamma2(x, l, b0, b1, t)) <= 1e-8);
    }
  }
}

TEST_CASE("time reversal returns to the mirrored start") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> g(1.2, 3.0);
  std::uniform_real_distribution<double> a1(-0.3, 0.8);
  for (int i = 0; i < 10; ++i) {
    const auto p = make(g(rng), 1.0, 0.5, 1.0, a1(rng));
    const double d = 1.5;
    const Trajectory fwd = integrate(p, span(d));
    REQUIRE(fwd.event().kind == Termination::ReachedEnd);
    const ScaleState mid = fwd.at(d);
    const Trajectory back = integrate(p.with_initial(mid.a, -mid.adot), span(d));
    const ScaleState end = back.at(d);
    CHECK(std::abs(end.a - p.a0()) <= 1e-7);
    CHECK(std::abs(end.adot + p.a1()) <= 1e-7);
  }
}

TEST_CASE("collapse is monotone once the scale falls below the barrier") {
  const Trajectory traj = integrate(make(2.0, 1.0, -2.0, 1.0, -0.1), span(5.0));
  REQUIRE(traj.collapsed());
  const auto& n = traj.nodes();
  for (std::size_t k = 2; k < n.size(); ++k) CHECK(n[k].a < n[k - 1].a);
}

TEST_CASE("dense output reproduces node values exactly") {
  const Trajectory traj = integrate(make(1.4, 0.7, 0.9, 1.0, 0.3), span(3.0));
  for (const auto& n : traj.nodes()) {
    const ScaleState s = traj.at(n.t);
    CHECK(s.a == n.a);
    CHECK(s.adot == n.adot);
  }
  CHECK_THROWS_AS((void)traj.at(3.5), Error);
  CHECK_THROWS_AS((void)traj.at(-0.1), Error);
}

TEST_CASE("step budget exhaustion is reported, never silent") {
  IntegrationConfig cfg = span(10.0);
  cfg.max_steps = 3;
  const Trajectory traj = integrate(make(1.5, 1.0, -2.0, 1.0, 0.0), cfg);
  CHECK(traj.event().kind == Termination::StepFailure);
  CHECK(!traj.event().message.empty());
  try {
    require_no_step_failure(traj);
    FAIL("expected StepFailure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::StepFailure);
  }
  IntegrationConfig bad;
  bad.rel_tol = 0.0;
  CHECK_THROWS_AS(integrate(make(1.5, 1.0, -2.0, 1.0, 0.0), bad), Error);
}

TEST_CASE("first_return_time against brute-force sampling") {
  const auto p = make(1.5, 1.0, -2.0, 1.0, 0.0);
  const Trajectory traj = integrate(p, span(4.0));
  const auto t_ret = first_return_time(traj);
  REQUIRE(t_ret);
  // Brute force: the orbit starts at a_max, so the return is the first later time where
  // adot falls from positive to non-positive.
  double prev = traj.at(0.1).adot;
  double found = 0.0;
  for (int k = 1; k <= 390000; ++k) {
    const double t = 0.1 + 1e-5 * k;
    const double v = traj.at(t).adot;
    if (prev > 0.0 && v <= 0.0) {
      found = t;
      break;
    }
    prev = v;
  }
  CHECK(std::abs(*t_ret - found) <= 2e-5);
}
