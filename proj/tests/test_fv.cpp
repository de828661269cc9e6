#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "vortexflow/fv.hpp"
#include "vortexflow/presets.hpp"

using namespace vortexflow;

namespace {

SolutionParams generic() { return validate_params(preset("generic")); }

Trajectory trajectory(const SolutionParams& p, double span, double t0 = 0.0) {
  IntegrationConfig cfg;
  cfg.t_end = span;
  Trajectory traj = integrate(p, cfg, t0);
  require_no_step_failure(traj);
  return traj;
}

FvConfig config(const SolutionParams& p, int n) {
  FvConfig cfg;
  cfg.resolution = n;
  cfg.K = p.K();
  cfg.gamma = p.gamma();
  return cfg;
}

double max_deviation(const ConservativeField& f, const ExactField& exact) {
  double dev = 0.0;
  for (int j = 0; j < f.ny(); ++j) {
    for (int i = 0; i < f.nx(); ++i) {
      const FlowSample s = exact(f.t, {f.x(i), f.y(j)});
      const std::size_t k = f.index(i, j);
      dev = std::max({dev, std::abs(f.rho[k] - s.rho), std::abs(f.m1[k] - s.rho * s.u1),
                      std::abs(f.m2[k] - s.rho * s.u2)});
    }
  }
  return dev;
}

}  // namespace

TEST_CASE("config validation") {
  FvConfig c;
  CHECK_NOTHROW(c.validate());
  for (auto mutate : std::vector<std::function<void(FvConfig&)>>{
           [](FvConfig& f) { f.cfl = 1.0; }, [](FvConfig& f) { f.cfl = 0.0; },
           [](FvConfig& f) { f.resolution = 8; }, [](FvConfig& f) { f.rho_floor = 0.0; },
           [](FvConfig& f) { f.gamma = 1.0; }, [](FvConfig& f) { f.box.x_hi = f.box.x_lo; },
           [](FvConfig& f) { f.t_end = f.t0 - 1.0; }}) {
    FvConfig bad;
    mutate(bad);
    CHECK_THROWS_AS(bad.validate(), Error);
  }
}

TEST_CASE("initial mass matches quadrature of the exact density") {
  const auto p = generic();
  const Trajectory traj = trajectory(p, 0.2);
  const ScaleState s0 = traj.at(0.0);
  // Independent reference: nested Gauss-Kronrod over the box.
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  const double exact = GK::integrate(
      [&](double y) { return GK::integrate([&](double x) { return eval_flow(p, s0, {x, y}).rho; }, -1.0, 1.0, 8, 1e-13); },
      -1.0, 1.0, 8, 1e-13);
  double err[2];
  int k = 0;
  for (int n : {64, 128}) {
    const ConservativeField f = init_from_exact(p, traj, 0.0, config(p, n));
    double mass = 0.0;
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) mass += f.rho[f.index(i, j)] * f.dx() * f.dy();
    }
    err[k++] = std::abs(mass - exact);
    CHECK(err[k - 1] <= 5.0 * f.dx() * f.dx() * exact);
  }
  const double ratio = err[0] / err[1];
  CHECK(ratio >= 3.0);
  CHECK(ratio <= 5.0);
}

TEST_CASE("uniform static state is a fixed point") {
  const auto p = validate_params({1.4, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0});
  const Trajectory traj = trajectory(p, 0.2);
  const FvConfig cfg = config(p, 32);
  ConservativeField f = init_from_exact(p, traj, 0.0, cfg);
  const double rho0 = f.rho[f.index(0, 0)];
  for (int j = 0; j < f.ny(); ++j) {
    for (int i = 0; i < f.nx(); ++i) CHECK(f.rho[f.index(i, j)] == rho0);
  }
  const ExactField exact = family_field(p, traj);
  for (int k = 0; k < 5; ++k) (void)step(f, cfg, exact);
  CHECK(max_deviation(f, exact) <= 1e-14);
}

TEST_CASE("zz embedding cells match the printed field") {
  const auto emb = zhang_zheng_embedding(1.0);
  const ScaleState s = zhang_zheng_scale(1.0);
  const auto p = emb.params.with_initial(s.a, s.adot);
  const Trajectory traj = trajectory(p, 0.2, 1.0);
  FvConfig cfg = config(p, 32);
  cfg.box = {-0.6, 0.6, -0.6, 0.6};
  cfg.t0 = 1.0;
  cfg.t_end = 1.2;
  const ConservativeField f = init_from_exact(p, traj, 1.0, cfg);
  for (int j = 0; j < f.ny(); j += 3) {
    for (int i = 0; i < f.nx(); i += 3) {
      const QueryPoint q{f.x(i), f.y(j)};
      const FlowSample z = zhang_zheng_field(1.0, embedding_mirror(q), 1.0);
      const std::size_t k = f.index(i, j);
      CHECK(std::abs(f.rho[k] - z.rho) <= 1e-12);
      CHECK(std::abs(f.m1[k] - z.rho * z.u1) <= 1e-12);
      CHECK(std::abs(f.m2[k] - z.rho * z.u2) <= 1e-12);
    }
  }
}

TEST_CASE("one step on exact data is first order") {
  const auto p = generic();
  const Trajectory traj = trajectory(p, 0.2);
  const ExactField exact = family_field(p, traj);
  double rate[2];
  int k = 0;
  for (int n : {64, 128}) {
    const FvConfig cfg = config(p, n);
    ConservativeField f = init_from_exact(p, traj, 0.0, cfg);
    const StepInfo info = step(f, cfg, exact);
    CHECK(info.dt > 0.0);
    CHECK(info.floored == 0);
    CHECK(f.t == info.dt);
    rate[k++] = max_deviation(f, exact) / info.dt;
  }
  const double ratio = rate[0] / rate[1];
  CHECK(ratio >= 1.6);
  CHECK(ratio <= 2.4);
}

TEST_CASE("Sod-like tube stays positive and monotone") {
  FvConfig cfg;
  cfg.resolution = 128;
  cfg.gamma = 1.4;
  cfg.t_end = 0.2;
  const ExactField tube = riemann_tube(1.0, 0.125, 0.0, cfg.K, cfg.gamma);
  ConservativeField f = init_from_field(tube, 0.0, cfg);
  const auto steps = static_cast<int>(advance(f, cfg, tube));
  CHECK(f.t == doctest::Approx(0.2));
  // The ghost ring holds the initial states, so rows within `steps` cells of the top or
  // bottom edge feel the walls; a first-order stencil reaches one cell per step.
  const int mid = f.ny() / 2;
  REQUIRE(steps < mid);
  for (int j = 0; j < f.ny(); ++j) {
    const bool shielded = std::min(j, f.ny() - 1 - j) >= steps;
    for (int i = 0; i < f.nx(); ++i) {
      const double r = f.rho[f.index(i, j)];
      CHECK(r >= cfg.rho_floor);
      if (!shielded) continue;
      CHECK(r == f.rho[f.index(i, mid)]);
      if (i > 0) CHECK(r <= f.rho[f.index(i - 1, j)]);
    }
  }
  // The waves have moved: the profile is no longer the initial jump.
  CHECK(f.rho[f.index(cfg.resolution / 2 - 2, mid)] < 1.0);
  CHECK(f.rho[f.index(cfg.resolution / 2 + 1, mid)] > 0.125);
  CHECK(f.floor_count == 0);
}

TEST_CASE("benchmark table") {
  const auto p = generic();
  const Trajectory traj = trajectory(p, 0.2);
  const ErrorReport rep = run_and_compare(p, traj, config(p, 64), {64, 128});
  REQUIRE(rep.rows.size() == 2);
  CHECK(!rep.rows[0].order_l1_rho);
  REQUIRE(rep.rows[1].order_l1_rho);
  CHECK(*rep.rows[1].order_l1_rho >= 0.7);
  CHECK(*rep.rows[1].order_l1_rho <= 1.2);
  CHECK(rep.rows[1].l1_rho < rep.rows[0].l1_rho);
  for (const auto& row : rep.rows) {
    CHECK(row.l1_rho > 0.0);
    CHECK(row.linf_rho >= row.l1_rho / 4.0);
    CHECK(row.l1_momentum > 0.0);
    CHECK(row.floor_count == 0);
    CHECK(row.steps > 0);
  }
  const double oracle = std::log(rep.rows[0].l1_rho / rep.rows[1].l1_rho) / std::log(2.0);
  CHECK(*rep.rows[1].order_l1_rho == doctest::Approx(oracle));

  // Determinism.
  const ErrorReport again = run_and_compare(p, traj, config(p, 64), {64, 128});
  CHECK(again.rows[1].l1_rho == rep.rows[1].l1_rho);
  CHECK(again.rows[1].steps == rep.rows[1].steps);
}

TEST_CASE("zero horizon gives zero error") {
  const auto p = generic();
  const Trajectory traj = trajectory(p, 0.2);
  FvConfig cfg = config(p, 32);
  cfg.t_end = 0.0;
  const ErrorReport rep = run_and_compare(p, traj, cfg, {16, 32});
  for (const auto& row : rep.rows) {
    CHECK(row.l1_rho == 0.0);
    CHECK(row.linf_momentum == 0.0);
    CHECK(row.steps == 0);
  }
  CHECK(!rep.rows[1].order_l1_rho);
}

TEST_CASE("benchmark errors") {
  const auto p = generic();
  const Trajectory traj = trajectory(p, 0.2);
  FvConfig cfg = config(p, 32);
  cfg.box = {-5.0, 5.0, -5.0, 5.0};
  try {
    (void)init_from_exact(p, traj, 0.0, cfg);
    FAIL("expected BoxOutsideSupport");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BoxOutsideSupport);
  }
  cfg = config(p, 32);
  cfg.t_end = 0.5;
  try {
    (void)init_from_exact(p, traj, 0.0, cfg);
    FAIL("expected TrajectoryTooShort");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TrajectoryTooShort);
  }
  CHECK_THROWS_AS(run_and_compare(p, traj, config(p, 32), {32}), Error);

  const ExactField broken = [](double, const QueryPoint&) { return FlowSample{std::nan(""), 0.0, 0.0, 0.0}; };
  FvConfig c2;
  c2.resolution = 16;
  ConservativeField f = init_from_field(broken, 0.0, c2);
  try {
    (void)step(f, c2, broken);
    FAIL("expected NonFiniteState");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFiniteState);
  }
}
