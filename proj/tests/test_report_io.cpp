#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "vortexflow/presets.hpp"
#include "vortexflow/report_io.hpp"

using namespace vortexflow;

namespace {

template <class T>
T round_trip(const T& v) {
  T out{};
  update_from_json(Json::parse(to_json(v).dump()), out);
  return out;
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("format_double reads back exactly") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");
}

TEST_CASE("config structs round-trip through JSON") {
  RawParams p{1.4, 2.0, -0.7, 0.9, 1.1, 1.3, -0.3};
  const RawParams q = round_trip(p);
  CHECK(to_json(q) == to_json(p));
  CHECK(q.xi == p.xi);

  IntegrationConfig ic;
  ic.rel_tol = 3e-11;
  ic.max_step = 0.25;
  ic.max_steps = 1234;
  CHECK(to_json(round_trip(ic)) == to_json(ic));

  GridSpec g;
  g.region = RegionKind::Box;
  g.nx = 7;
  g.h = 2.5e-3;
  CHECK(to_json(round_trip(g)) == to_json(g));

  Grid3DSpec g3;
  g3.half_width = {0.1, 0.2, 0.3};
  CHECK(to_json(round_trip(g3)) == to_json(g3));

  FvConfig fv;
  fv.box = {-0.5, 0.7, -0.2, 0.9};
  fv.cfl = 0.3;
  CHECK(to_json(round_trip(fv)) == to_json(fv));

  const Conjecture3DParams c3 = preset_3d("anisotropic-drift");
  CHECK(to_json(round_trip(c3)) == to_json(c3));
}

TEST_CASE("partial updates leave other fields alone") {
  RawParams p;
  update_from_json(Json{{"gamma", 3.0}}, p);
  CHECK(p.gamma == 3.0);
  CHECK(p.K == RawParams{}.K);
  GridSpec g;
  update_from_json(Json{{"region", "box"}, {"nx", 9}}, g);
  CHECK(g.region == RegionKind::Box);
  CHECK(g.nx == 9);
  CHECK(g.h == GridSpec{}.h);
}

TEST_CASE("unknown keys and wrong types are rejected") {
  RawParams p;
  try {
    update_from_json(Json{{"gama", 3.0}}, p);
    FAIL("expected InvalidConfig");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidConfig);
  }
  CHECK_THROWS_AS(update_from_json(Json{{"gamma", "three"}}, p), Error);
  GridSpec g;
  CHECK_THROWS_AS(update_from_json(Json{{"region", "disk"}}, g), Error);
  FvConfig fv;
  CHECK_THROWS_AS(update_from_json(Json{{"box", {{"left", 0.0}}}}, fv), Error);
}

TEST_CASE("flow CSV round-trip is exact") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const auto p = validate_params(preset("generic"));
  std::vector<FlowRow> rows;
  for (int i = 0; i < 50; ++i) {
    const QueryPoint q{u(rng), u(rng)};
    rows.push_back({q.x, q.y, eval_flow(p, {0.0, 1.0, 0.3}, q)});
  }
  std::stringstream ss;
  write_flow_csv(ss, rows);
  CHECK(ss.str().rfind("x,y,rho,u1,u2,p\n", 0) == 0);
  const std::vector<FlowRow> back = read_flow_csv(ss);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].x == rows[i].x);
    CHECK(back[i].y == rows[i].y);
    CHECK(back[i].sample.rho == rows[i].sample.rho);
    CHECK(back[i].sample.u1 == rows[i].sample.u1);
    CHECK(back[i].sample.u2 == rows[i].sample.u2);
    CHECK(back[i].sample.p == rows[i].sample.p);
  }
  std::stringstream bad("x,y,rho,u1,u2,p\n1,2,3\n");
  CHECK_THROWS_AS(read_flow_csv(bad), Error);
  std::stringstream header("a,b\n");
  CHECK_THROWS_AS(read_flow_csv(header), Error);
}

TEST_CASE("reports serialize their key facts") {
  const auto p = validate_params(preset("periodic-demo"));
  const Regime r = classify(p);
  const Json j = to_json(r);
  CHECK(j["kind"] == "TimePeriodic");
  CHECK(j["branch"] == "1");
  CHECK(j["period"].get<double>() == *r.period);
  CHECK(j["critical"]["a_max"].is_null());

  const Json c = to_json(certify(p, r, 10.0));
  CHECK(c["consistent"] == true);

  ResidualReport rep;
  rep.equations.push_back({"mass", 1.0, 0.5, 2.0, 0.5, 0.25, {0.1, 0.2}});
  rep.order = 2.0;
  const Json jr = to_json(rep);
  CHECK(jr.dump().find("\"mass\"") != std::string::npos);
  CHECK(jr.dump().find("inf") == std::string::npos);

  PeriodEstimate pe{2.5, 1e-14, 5};
  CHECK(to_json(pe)["period"] == 2.5);
}

TEST_CASE("trajectory and table CSV shapes") {
  IntegrationConfig cfg;
  cfg.t_end = 1.0;
  const Trajectory traj = integrate(validate_params(preset("expanding")), cfg);
  std::stringstream ss;
  write_trajectory_csv(ss, traj);
  CHECK(ss.str().rfind("t,a,adot,E,F_kin,F_pot\n", 0) == 0);
  CHECK(count_lines(ss.str()) == traj.nodes().size() + 1);

  ErrorReport er;
  er.rows.push_back({64, 1e-3, 2e-3, 3e-3, 4e-3, 10, 0, std::nullopt});
  er.rows.push_back({128, 5e-4, 1e-3, 1.5e-3, 2e-3, 20, 0, 1.0});
  std::stringstream t;
  write_error_table_csv(t, er);
  CHECK(t.str().rfind("resolution,L1_rho,Linf_rho,L1_momentum,Linf_momentum,order,steps,floored\n", 0) == 0);
  CHECK(count_lines(t.str()) == 3);

  FvConfig fv;
  fv.resolution = 16;
  const ConservativeField f =
      init_from_field([](double, const QueryPoint&) { return FlowSample{1.0, 0.0, 0.0, 1.0}; }, 0.0, fv);
  std::stringstream cells;
  write_cells_csv(cells, f);
  CHECK(count_lines(cells.str()) == 16 * 16 + 1);
}
