#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <sstream>

#include "vortexflow/presets.hpp"
#include "vortexflow/regimes.hpp"

namespace vortexflow::cli {

namespace {

const std::vector<std::string> kCommands{"eval", "integrate", "classify", "period", "verify", "verify3d", "fvbench"};

Json num(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

double as_double(const Json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw Error(ErrorCode::InvalidConfig, "bad value for '" + key + "'");
}

template <class T>
std::vector<T> as_vector(const Json& v, const std::string& key) {
  if (!v.is_array()) throw Error(ErrorCode::InvalidConfig, "'" + key + "' must be an array");
  std::vector<T> out;
  for (const auto& e : v) {
    if constexpr (std::is_same_v<T, double>) {
      out.push_back(as_double(e, key));
    } else {
      if (!e.is_number_integer()) throw Error(ErrorCode::InvalidConfig, "'" + key + "' needs integers");
      out.push_back(e.get<T>());
    }
  }
  return out;
}

std::string as_string(const Json& v, const std::string& key) {
  if (!v.is_string()) throw Error(ErrorCode::InvalidConfig, "'" + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace

Json to_json(const RunConfig& c) {
  Json ladder = Json::array();
  for (double h : c.ladder) ladder.push_back(num(h));
  Json ladder3d = Json::array();
  for (double h : c.ladder3d) ladder3d.push_back(num(h));
  return {{"command", c.command},
          {"preset", c.preset},
          {"t0", num(c.t0)},
          {"params", vortexflow::to_json(c.params)},
          {"integration", vortexflow::to_json(c.integration)},
          {"grid", vortexflow::to_json(c.grid)},
          {"time", c.time ? num(*c.time) : Json(nullptr)},
          {"target", c.target},
          {"mu", num(c.mu)},
          {"viscous_h", num(c.viscous_h)},
          {"ladder", ladder},
          {"tolerance", num(c.tolerance)},
          {"horizon", num(c.horizon)},
          {"seed", c.seed},
          {"count", c.count},
          {"case3d", c.case3d},
          {"params3d", vortexflow::to_json(c.params3d)},
          {"grid3d", vortexflow::to_json(c.grid3d)},
          {"ladder3d", ladder3d},
          {"fv", vortexflow::to_json(c.fv)},
          {"resolutions", c.resolutions},
          {"cells", c.cells_path},
          {"out", c.out},
          {"format", c.format}};
}

void update_from_json(const Json& j, RunConfig& c) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
  using Setter = std::function<void(const Json&)>;
  const std::map<std::string, Setter> setters{
      {"command", [&](const Json&) {}},  // the subcommand decides
      {"preset", [&](const Json&) {}},   // applied before the file
      {"t0", [&](const Json& v) { c.t0 = as_double(v, "t0"); }},
      {"params", [&](const Json& v) { vortexflow::update_from_json(v, c.params); }},
      {"integration", [&](const Json& v) { vortexflow::update_from_json(v, c.integration); }},
      {"grid", [&](const Json& v) { vortexflow::update_from_json(v, c.grid); }},
      {"time",
       [&](const Json& v) {
         if (v.is_null()) {
           c.time.reset();
         } else {
           c.time = as_double(v, "time");
         }
       }},
      {"target", [&](const Json& v) { c.target = as_string(v, "target"); }},
      {"mu", [&](const Json& v) { c.mu = as_double(v, "mu"); }},
      {"viscous_h", [&](const Json& v) { c.viscous_h = as_double(v, "viscous_h"); }},
      {"ladder", [&](const Json& v) { c.ladder = as_vector<double>(v, "ladder"); }},
      {"tolerance", [&](const Json& v) { c.tolerance = as_double(v, "tolerance"); }},
      {"horizon", [&](const Json& v) { c.horizon = as_double(v, "horizon"); }},
      {"seed",
       [&](const Json& v) {
         if (!v.is_number_unsigned()) throw Error(ErrorCode::InvalidConfig, "'seed' must be unsigned");
         c.seed = v.get<unsigned>();
       }},
      {"count",
       [&](const Json& v) {
         if (!v.is_number_integer()) throw Error(ErrorCode::InvalidConfig, "'count' must be an integer");
         c.count = v.get<int>();
       }},
      {"case3d", [&](const Json& v) { c.case3d = as_string(v, "case3d"); }},
      {"params3d", [&](const Json& v) { vortexflow::update_from_json(v, c.params3d); }},
      {"grid3d", [&](const Json& v) { vortexflow::update_from_json(v, c.grid3d); }},
      {"ladder3d", [&](const Json& v) { c.ladder3d = as_vector<double>(v, "ladder3d"); }},
      {"fv", [&](const Json& v) { vortexflow::update_from_json(v, c.fv); }},
      {"resolutions", [&](const Json& v) { c.resolutions = as_vector<int>(v, "resolutions"); }},
      {"cells", [&](const Json& v) { c.cells_path = as_string(v, "cells"); }},
      {"out", [&](const Json& v) { c.out = as_string(v, "out"); }},
      {"format", [&](const Json& v) { c.format = as_string(v, "format"); }},
  };
  for (const auto& item : j.items()) {
    const auto it = setters.find(item.key());
    if (it == setters.end()) throw Error(ErrorCode::InvalidConfig, "unknown config key '" + item.key() + "'");
    it->second(item.value());
  }
}

void apply_preset(const std::string& name, RunConfig& c) {
  const Preset& p = preset_entry(name);
  c.preset = name;
  c.params = p.params;
  c.t0 = p.t0;
  c.fv.t0 = p.t0;
  c.fv.t_end = p.t0 + 0.2;
}

void resolve_defaults(RunConfig& c) {
  if (c.format.empty()) {
    c.format = (c.command == "eval" || c.command == "integrate" || c.command == "fvbench") ? "csv" : "json";
  }
  if (!c.time) {
    if (c.command == "eval") {
      c.time = c.t0;
    } else if (c.command == "verify") {
      if (c.target == "zz" || c.target == "zz-as-printed") {
        c.time = 1.0;
      } else if (c.target == "generic-g") {
        c.time = 0.5;
      } else {
        c.time = c.t0 + 0.5;
      }
    } else if (c.command == "verify3d") {
      c.time = 0.5;
    }
  }
}

namespace {

// Dense state at t, tolerating the rounding of t0 + (t - t0) at the end of the span.
ScaleState state_at(const Trajectory& traj, double t) {
  if (!traj.covers(t) && std::abs(t - traj.t_end()) <= 1e-12 * std::max(1.0, std::abs(t))) {
    ScaleState s = traj.at(traj.t_end());
    s.t = t;
    return s;
  }
  if (!traj.covers(t)) {
    throw Error(ErrorCode::CollapsedState, "the scale collapsed at t = " + format_double(traj.event().t) +
                                               " before the requested time " + format_double(t));
  }
  return traj.at(t);
}

Trajectory integrate_span(const SolutionParams& p, IntegrationConfig cfg, double t0, double span) {
  cfg.t_end = span;
  Trajectory traj = integrate(p, cfg, t0);
  require_no_step_failure(traj);
  return traj;
}

Json event_json(const TerminalEvent& e) {
  const char* kind = e.kind == Termination::ReachedEnd ? "reached-end"
                     : e.kind == Termination::Collapsed ? "collapsed"
                                                        : "step-failure";
  return {{"kind", kind}, {"t", num(e.t)}, {"error_bar", num(e.error_bar)}, {"message", e.message}};
}

int cmd_eval(const RunConfig& c, std::ostream& out) {
  const SolutionParams p = validate_params(c.params);
  const double t = *c.time;
  ScaleState st{c.t0, p.a0(), p.a1()};
  if (t < c.t0) throw Error(ErrorCode::InvalidConfig, "evaluation time precedes t0");
  if (t > c.t0) st = state_at(integrate_span(p, c.integration, c.t0, t - c.t0), t);
  std::vector<FlowRow> rows;
  for (const auto& q : c.grid.points()) rows.push_back({q.x, q.y, eval_flow(p, st, q)});
  if (c.format == "csv") {
    write_flow_csv(out, rows);
    return kExitOk;
  }
  Json pts = Json::array();
  for (const auto& r : rows) {
    pts.push_back({{"x", num(r.x)},
                   {"y", num(r.y)},
                   {"rho", num(r.sample.rho)},
                   {"u1", num(r.sample.u1)},
                   {"u2", num(r.sample.u2)},
                   {"p", num(r.sample.p)}});
  }
  out << Json{{"time", num(t)}, {"state", {{"t", num(st.t)}, {"a", num(st.a)}, {"adot", num(st.adot)}}}, {"points", pts}}
             .dump(2)
      << '\n';
  return kExitOk;
}

int cmd_integrate(const RunConfig& c, std::ostream& out) {
  const SolutionParams p = validate_params(c.params);
  const Trajectory traj = integrate_span(p, c.integration, c.t0, c.integration.t_end);
  if (c.format == "csv") {
    write_trajectory_csv(out, traj);
    return kExitOk;
  }
  Json t = Json::array();
  Json a = Json::array();
  Json adot = Json::array();
  Json e = Json::array();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    t.push_back(num(traj.nodes()[i].t));
    a.push_back(num(traj.nodes()[i].a));
    adot.push_back(num(traj.nodes()[i].adot));
    e.push_back(num(traj.energies()[i].E));
  }
  out << Json{{"event", event_json(traj.event())},
              {"energy_drift", num(energy_drift(traj))},
              {"nodes", traj.size()},
              {"t", t},
              {"a", a},
              {"adot", adot},
              {"E", e}}
             .dump(2)
      << '\n';
  return kExitOk;
}

void write_classification(std::ostream& out, const std::string& format, const Regime& r,
                          const CertificationReport& cert) {
  if (format == "csv") {
    out << "branch,kind,E,F_kin,F_pot,period,t_star,consistent\n";
    out << r.branch << ',' << to_string(r.kind) << ',' << format_double(r.initial_energy.E) << ','
        << format_double(r.initial_energy.F_kin) << ',' << format_double(r.initial_energy.F_pot) << ','
        << (r.period ? format_double(*r.period) : "") << ','
        << (r.blowup ? format_double(r.blowup->t_star) : "") << ',' << (cert.consistent ? "true" : "false")
        << '\n';
    return;
  }
  out << Json{{"regime", vortexflow::to_json(r)}, {"certification", vortexflow::to_json(cert)}}.dump(2) << '\n';
}

int cmd_classify(const RunConfig& c, std::ostream& out) {
  const SolutionParams p = validate_params(c.params);
  const Regime r = classify(p);
  try {
    const CertificationReport cert = certify(p, r, c.horizon, c.integration);
    write_classification(out, c.format, r, cert);
    return kExitOk;
  } catch (const CertificationMismatchError& e) {
    write_classification(out, c.format, r, e.report());
    throw;
  }
}

int cmd_period(const RunConfig& c, std::ostream& out) {
  const SolutionParams p = validate_params(c.params);
  const PeriodEstimate pe = period_quadrature(p);
  const TurningPoints tp = turning_points(p);
  std::optional<double> t_return;
  if (p.a1() == 0.0) {
    const Trajectory traj = integrate_span(p, c.integration, c.t0, 1.5 * pe.period);
    t_return = first_return_time(traj);
  }
  std::optional<double> rel;
  if (t_return) rel = std::abs(pe.period - *t_return) / *t_return;
  if (c.format == "csv") {
    out << "period,error_estimate,a_min,a_max,return_time,relative_difference\n"
        << format_double(pe.period) << ',' << format_double(pe.error_estimate) << ','
        << format_double(tp.a_min) << ',' << format_double(tp.a_max) << ','
        << (t_return ? format_double(*t_return) : "") << ',' << (rel ? format_double(*rel) : "") << '\n';
    return kExitOk;
  }
  out << Json{{"period", num(pe.period)},
              {"error_estimate", num(pe.error_estimate)},
              {"quadrature_levels", pe.levels},
              {"a_min", num(tp.a_min)},
              {"a_max", num(tp.a_max)},
              {"return_time", t_return ? num(*t_return) : Json(nullptr)},
              {"relative_difference", rel ? num(*rel) : Json(nullptr)}}
             .dump(2)
      << '\n';
  return kExitOk;
}

void write_residual_csv(std::ostream& out, const ResidualReport& r) {
  out << "equation,max_abs,mean_abs,scale,normalized_max,normalized_mean\n";
  for (const auto& e : r.equations) {
    out << e.name << ',' << format_double(e.max_abs) << ',' << format_double(e.mean_abs) << ','
        << format_double(e.scale) << ',' << format_double(e.normalized_max) << ','
        << format_double(e.normalized_mean) << '\n';
  }
}

int finish_verify(const RunConfig& c, std::ostream& out, bool pass, const ResidualReport& rep, Json extra) {
  if (c.format == "csv") {
    write_residual_csv(out, rep);
  } else {
    Json j = {{"target", c.target}, {"time", num(*c.time)}, {"pass", pass}, {"tolerance", num(c.tolerance)}};
    for (auto& item : extra.items()) j[item.key()] = item.value();
    j["report"] = vortexflow::to_json(rep);
    out << j.dump(2) << '\n';
  }
  return pass ? kExitOk : kExitDomain;
}

double momentum_max(const ResidualReport& r) {
  double m = 0.0;
  for (const auto& e : r.equations) {
    if (e.name != "mass") m = std::max(m, e.normalized_max);
  }
  return m;
}

int verify_family(const RunConfig& c, std::ostream& out) {
  const SolutionParams p = validate_params(c.params);
  const double t = *c.time;
  const double ratio = c.grid.h_t / c.grid.h;
  double h_t_max = c.grid.h_t;
  for (double h : c.ladder) h_t_max = std::max(h_t_max, ratio * h);
  if (!(t - h_t_max > c.t0)) {
    throw Error(ErrorCode::TrajectoryTooShort, "t - h_t must lie after t0");
  }
  const double span = t - c.t0 + 4.0 * h_t_max;
  Trajectory traj = integrate(p, residual_integration_config(span), c.t0);
  require_no_step_failure(traj);

  const bool ns = c.target == "navier-stokes";
  auto residual = [&](const GridSpec& g) {
    return ns ? navier_stokes_residual_2d(p, traj, t, g, c.mu, c.viscous_h) : euler_residual_2d(p, traj, t, g);
  };
  ResidualReport rep = residual(c.grid);
  if (!c.ladder.empty()) {
    const ConvergenceResult conv = residual_convergence(
        [&](double h) {
          GridSpec g = c.grid;
          g.h = h;
          g.h_t = ratio * h;
          return residual(g).normalized_max();
        },
        c.ladder);
    rep.ladder_h = conv.h;
    rep.ladder_residual = conv.residual;
    rep.order = conv.order;
  }
  if (!ns) return finish_verify(c, out, rep.normalized_max() <= c.tolerance, rep, Json::object());

  const ResidualReport euler = euler_residual_2d(p, traj, t, c.grid);
  double diff = 0.0;
  for (std::size_t i = 0; i < rep.equations.size(); ++i) {
    if (rep.equations[i].name == "mass") continue;
    diff = std::max(diff, std::abs(rep.equations[i].normalized_max - euler.equations[i].normalized_max));
  }
  const bool pass = rep.viscous_normalized_max <= 1e-10 && diff <= 1e-10 && rep.normalized_max() <= c.tolerance;
  return finish_verify(c, out, pass, rep,
                       {{"mu", num(c.mu)},
                        {"viscous_normalized_max", num(rep.viscous_normalized_max)},
                        {"euler_momentum_normalized_max", num(momentum_max(euler))},
                        {"euler_navier_stokes_difference", num(diff)}});
}

int verify_zz(const RunConfig& c, std::ostream& out) {
  const ZzOrientation o = c.target == "zz" ? ZzOrientation::Mirrored : ZzOrientation::AsPrinted;
  const ResidualReport rep = zz_direct_residual(*c.time, c.params.K, c.grid, o);
  return finish_verify(c, out, rep.normalized_max() <= c.tolerance, rep, Json::object());
}

int verify_generic_g(const RunConfig& c, std::ostream& out) {
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  Json sweep = Json::array();
  double worst = 0.0;
  double best = std::numeric_limits<double>::infinity();
  ResidualReport worst_rep;
  for (int k = 0; k < c.count; ++k) {
    std::array<double, 5> cs{};
    for (double& v : cs) v = coef(rng);
    GenericRotationField field;
    field.f = [](double z) { return std::exp(-z * z); };
    field.G = [cs](double /*t*/, double r) { return cs[0] + r * (cs[1] + r * (cs[2] + r * (cs[3] + r * cs[4]))); };
    field.scale = [](double t) { return std::pair{1.0 + t, 1.0}; };
    const ResidualReport rep = mass_residual_generic_G(field, *c.time, c.grid);
    const double v = rep.normalized_max();
    sweep.push_back({{"coefficients", cs}, {"normalized_max", num(v)}});
    if (v >= worst) {
      worst = v;
      worst_rep = rep;
    }
    best = std::min(best, v);
  }
  return finish_verify(c, out, worst <= c.tolerance, worst_rep,
                       {{"sweep", sweep}, {"max_over_min", num(best > 0.0 ? worst / best : 1.0)}});
}

int cmd_verify(const RunConfig& c, std::ostream& out) {
  if (c.target == "family" || c.target == "navier-stokes") return verify_family(c, out);
  if (c.target == "zz" || c.target == "zz-as-printed") return verify_zz(c, out);
  if (c.target == "generic-g") return verify_generic_g(c, out);
  throw Error(ErrorCode::InvalidConfig, "unknown verify target '" + c.target + "'");
}

int cmd_verify3d(const RunConfig& c, std::ostream& out) {
  std::vector<std::pair<std::string, Conjecture3DParams>> cases;
  if (c.case3d == "all") {
    for (const auto& p : presets_3d()) cases.emplace_back(p.name, p.params);
  } else if (c.case3d == "custom") {
    cases.emplace_back("custom", c.params3d);
  } else {
    cases.emplace_back(c.case3d, preset_3d(c.case3d));
  }
  bool all_pass = true;
  Json list = Json::array();
  if (c.format == "csv") out << "case,pass,finest_normalized_max,order,invariant_drift,verdict\n";
  for (const auto& [name, params] : cases) {
    const ConjectureReport rep = check_conjecture_3d(params, *c.time, c.grid3d, c.ladder3d, c.tolerance);
    all_pass = all_pass && rep.pass;
    if (c.format == "csv") {
      out << name << ',' << (rep.pass ? "true" : "false") << ',' << format_double(rep.finest.normalized_max())
          << ',' << (rep.convergence.order ? format_double(*rep.convergence.order) : "") << ','
          << format_double(rep.invariant_drift) << ",\"" << rep.verdict << "\"\n";
    } else {
      list.push_back({{"case", name}, {"params", vortexflow::to_json(params)}, {"report", vortexflow::to_json(rep)}});
    }
  }
  if (c.format != "csv") {
    out << Json{{"time", num(*c.time)}, {"all_pass", all_pass}, {"cases", list}}.dump(2) << '\n';
  }
  return all_pass ? kExitOk : kExitDomain;
}

int cmd_fvbench(const RunConfig& c, std::ostream& out) {
  const SolutionParams p = validate_params(c.params);
  FvConfig fv = c.fv;
  fv.K = p.K();
  fv.gamma = p.gamma();
  if (fv.t0 < c.t0) throw Error(ErrorCode::InvalidConfig, "benchmark start precedes t0");
  const double span = std::max(fv.t_end - c.t0, 1e-9);
  const Trajectory traj = integrate_span(p, c.integration, c.t0, span);
  const ErrorReport report = run_and_compare(p, traj, fv, c.resolutions);
  if (!c.cells_path.empty()) {
    fv.resolution = c.resolutions.back();
    ConservativeField field = init_from_exact(p, traj, fv.t0, fv);
    advance(field, fv, family_field(p, traj));
    std::ofstream cells(c.cells_path);
    if (!cells) throw std::ios_base::failure("cannot write " + c.cells_path);
    write_cells_csv(cells, field);
  }
  if (c.format == "csv") {
    write_error_table_csv(out, report);
  } else {
    out << vortexflow::to_json(report).dump(2) << '\n';
  }
  return kExitOk;
}

}  // namespace

int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  std::ostringstream buffer;
  buffer.precision(17);
  int code = kExitOk;
  auto flush = [&]() -> int {
    if (c.out == "-" || c.out.empty()) {
      out << buffer.str();
      return kExitOk;
    }
    std::ofstream file(c.out);
    if (!file) {
      err << "error: cannot write " << c.out << '\n';
      return kExitUsage;
    }
    file << buffer.str();
    return kExitOk;
  };
  try {
    if (c.format != "csv" && c.format != "json") {
      err << "error: --format must be csv or json\n";
      return kExitUsage;
    }
    if (c.command == "eval") {
      code = cmd_eval(c, buffer);
    } else if (c.command == "integrate") {
      code = cmd_integrate(c, buffer);
    } else if (c.command == "classify") {
      code = cmd_classify(c, buffer);
    } else if (c.command == "period") {
      code = cmd_period(c, buffer);
    } else if (c.command == "verify") {
      code = cmd_verify(c, buffer);
    } else if (c.command == "verify3d") {
      code = cmd_verify3d(c, buffer);
    } else if (c.command == "fvbench") {
      code = cmd_fvbench(c, buffer);
    } else {
      err << "error: unknown command '" << c.command << "'\n";
      return kExitUsage;
    }
  } catch (const Error& e) {
    const int io = flush();
    err << "error: " << e.what() << '\n';
    return io == kExitOk ? kExitDomain : io;
  } catch (const std::ios_base::failure& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  const int io = flush();
  return io == kExitOk ? code : io;
}

namespace {

class FlagSet {
 public:
  explicit FlagSet(CLI::App& app) : app_(app) {}

  template <class T, class Set>
  CLI::Option* add(const std::string& name, const std::string& desc, Set set) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app_.add_option(name, *value, desc);
    appliers_.push_back([opt, value, set](RunConfig& c) {
      if (opt->count() > 0) set(c, *value);
    });
    return opt;
  }

  CLI::Option* add_vec3(const std::string& name, const std::string& desc, Vec3 Conjecture3DParams::*member) {
    return add<std::vector<double>>(name, desc, [member](RunConfig& c, const std::vector<double>& v) {
             std::copy(v.begin(), v.end(), (c.params3d.*member).begin());
           })
        ->delimiter(',')
        ->expected(3);
  }

  void apply(RunConfig& c) const {
    for (const auto& a : appliers_) a(c);
  }

 private:
  CLI::App& app_;
  std::vector<std::function<void(RunConfig&)>> appliers_;
};

void add_flags(FlagSet& f) {
  // Family parameters.
  f.add<double>("--gamma", "adiabatic exponent", [](RunConfig& c, double v) { c.params.gamma = v; c.params3d.gamma = v; });
  f.add<double>("--K", "pressure constant", [](RunConfig& c, double v) { c.params.K = v; c.params3d.K = v; });
  f.add<double>("--xi", "rotation constant", [](RunConfig& c, double v) { c.params.xi = v; });
  f.add<double>("--lambda", "profile constant", [](RunConfig& c, double v) { c.params.lambda = v; });
  f.add<double>("--alpha", "profile offset", [](RunConfig& c, double v) { c.params.alpha = v; });
  f.add<double>("--a0", "initial scale", [](RunConfig& c, double v) { c.params.a0 = v; });
  f.add<double>("--a1", "initial scale rate", [](RunConfig& c, double v) { c.params.a1 = v; });
  f.add<double>("--t0", "time at which (a0, a1) hold", [](RunConfig& c, double v) { c.t0 = v; });
  // Integration.
  f.add<double>("--rel-tol", "relative tolerance", [](RunConfig& c, double v) { c.integration.rel_tol = v; });
  f.add<double>("--abs-tol", "absolute tolerance", [](RunConfig& c, double v) { c.integration.abs_tol = v; });
  f.add<double>("--max-step", "largest step", [](RunConfig& c, double v) { c.integration.max_step = v; });
  f.add<double>("--collapse-epsilon", "collapse threshold on a",
                [](RunConfig& c, double v) { c.integration.collapse_epsilon = v; });
  f.add<double>("--t-end", "integrated span from t0", [](RunConfig& c, double v) { c.integration.t_end = v; });
  f.add<std::size_t>("--max-steps", "step budget", [](RunConfig& c, std::size_t v) { c.integration.max_steps = v; });
  // Sampling grid.
  f.add<std::string>("--region", "annulus or box", [](RunConfig& c, const std::string& v) {
     if (v == "annulus") {
       c.grid.region = RegionKind::Annulus;
     } else if (v == "box") {
       c.grid.region = RegionKind::Box;
     } else {
       throw Error(ErrorCode::InvalidConfig, "--region must be annulus or box");
     }
   });
  f.add<double>("--r-lo", "inner radius", [](RunConfig& c, double v) { c.grid.r_lo = v; });
  f.add<double>("--r-hi", "outer radius", [](RunConfig& c, double v) { c.grid.r_hi = v; });
  f.add<int>("--n-r", "radii", [](RunConfig& c, int v) { c.grid.n_r = v; });
  f.add<int>("--n-theta", "angles", [](RunConfig& c, int v) { c.grid.n_theta = v; });
  f.add<double>("--x-lo", "box left edge", [](RunConfig& c, double v) { c.grid.x_lo = v; });
  f.add<double>("--x-hi", "box right edge", [](RunConfig& c, double v) { c.grid.x_hi = v; });
  f.add<double>("--y-lo", "box bottom edge", [](RunConfig& c, double v) { c.grid.y_lo = v; });
  f.add<double>("--y-hi", "box top edge", [](RunConfig& c, double v) { c.grid.y_hi = v; });
  f.add<int>("--nx", "box points along x", [](RunConfig& c, int v) { c.grid.nx = v; });
  f.add<int>("--ny", "box points along y", [](RunConfig& c, int v) { c.grid.ny = v; });
  f.add<double>("--h", "space step", [](RunConfig& c, double v) { c.grid.h = v; });
  f.add<double>("--h-t", "time step", [](RunConfig& c, double v) { c.grid.h_t = v; });
  f.add<int>("--fd-order", "2 or 4", [](RunConfig& c, int v) { c.grid.fd_order = v; });
  f.add<double>("--support-margin", "fraction of the support boundary in s",
                [](RunConfig& c, double v) { c.grid.support_margin = v; });
  // Verification.
  f.add<double>("--time", "evaluation time", [](RunConfig& c, double v) { c.time = v; });
  f.add<std::string>("--target", "family, navier-stokes, zz, zz-as-printed or generic-g",
                     [](RunConfig& c, const std::string& v) { c.target = v; });
  f.add<double>("--mu", "viscosity", [](RunConfig& c, double v) { c.mu = v; });
  f.add<double>("--viscous-h", "Laplacian step", [](RunConfig& c, double v) { c.viscous_h = v; });
  f.add<std::vector<double>>("--ladder", "comma-separated decreasing h values",
                             [](RunConfig& c, const std::vector<double>& v) { c.ladder = v; })
      ->delimiter(',');
  f.add<double>("--tolerance", "PASS threshold on normalized residuals",
                [](RunConfig& c, double v) { c.tolerance = v; });
  f.add<double>("--horizon", "certification horizon", [](RunConfig& c, double v) { c.horizon = v; });
  f.add<unsigned>("--seed", "random seed", [](RunConfig& c, unsigned v) { c.seed = v; });
  f.add<int>("--count", "number of random fields", [](RunConfig& c, int v) { c.count = v; });
  // 3D harness.
  f.add<std::string>("--case", "isotropic, pure-drift, anisotropic-drift, all or custom",
                     [](RunConfig& c, const std::string& v) { c.case3d = v; });
  f.add<double>("--xi3", "3D separation constant", [](RunConfig& c, double v) { c.params3d.xi3 = v; });
  f.add<double>("--alpha3", "3D profile offset", [](RunConfig& c, double v) { c.params3d.alpha3 = v; });
  f.add_vec3("--axes-a0", "initial axis scales a,b,c", &Conjecture3DParams::a0);
  f.add_vec3("--axes-a1", "initial axis rates", &Conjecture3DParams::a1);
  f.add_vec3("--drift-d0", "drift offsets", &Conjecture3DParams::d0);
  f.add_vec3("--drift-d1", "drift velocities", &Conjecture3DParams::d1);
  f.add<std::vector<double>>("--half-width", "3D box half-widths", [](RunConfig& c, const std::vector<double>& v) {
     std::copy(v.begin(), v.end(), c.grid3d.half_width.begin());
   })->delimiter(',')->expected(3);
  f.add<int>("--n3", "3D points per axis", [](RunConfig& c, int v) { c.grid3d.n = v; });
  f.add<std::vector<double>>("--ladder3d", "comma-separated decreasing 3D h values",
                             [](RunConfig& c, const std::vector<double>& v) { c.ladder3d = v; })
      ->delimiter(',');
  // Finite volumes.
  f.add<double>("--fv-x-lo", "FV box left edge", [](RunConfig& c, double v) { c.fv.box.x_lo = v; });
  f.add<double>("--fv-x-hi", "FV box right edge", [](RunConfig& c, double v) { c.fv.box.x_hi = v; });
  f.add<double>("--fv-y-lo", "FV box bottom edge", [](RunConfig& c, double v) { c.fv.box.y_lo = v; });
  f.add<double>("--fv-y-hi", "FV box top edge", [](RunConfig& c, double v) { c.fv.box.y_hi = v; });
  f.add<double>("--cfl", "CFL number", [](RunConfig& c, double v) { c.fv.cfl = v; });
  f.add<double>("--rho-floor", "density floor", [](RunConfig& c, double v) { c.fv.rho_floor = v; });
  f.add<double>("--fv-t0", "benchmark start time", [](RunConfig& c, double v) { c.fv.t0 = v; });
  f.add<double>("--fv-t-end", "benchmark end time", [](RunConfig& c, double v) { c.fv.t_end = v; });
  f.add<std::vector<int>>("--resolutions", "comma-separated cells per axis",
                          [](RunConfig& c, const std::vector<int>& v) { c.resolutions = v; })
      ->delimiter(',');
  f.add<std::string>("--cells", "per-cell CSV dump of the finest run",
                     [](RunConfig& c, const std::string& v) { c.cells_path = v; });
  // Output.
  f.add<std::string>("--out", "output file, - for stdout", [](RunConfig& c, const std::string& v) { c.out = v; });
  f.add<std::string>("--format", "csv or json", [](RunConfig& c, const std::string& v) { c.format = v; });
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact vortical flows of the 2D isentropic Euler equations: evaluation, scale dynamics, "
               "residual verification and finite-volume benchmarks"};
  app.name("vortexflow");
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1, 1);
  app.fallthrough();

  const std::map<std::string, std::string> descriptions{
      {"eval", "flow fields on the sampling grid (x, y, rho, u1, u2, p)"},
      {"integrate", "scale trajectory (t, a, adot, E, F_kin, F_pot)"},
      {"classify", "long-time regime with a certification run"},
      {"period", "breathing period by quadrature and by return time"},
      {"verify", "finite-difference residuals of exact fields"},
      {"verify3d", "residual harness for the candidate 3D family"},
      {"fvbench", "finite-volume error table against the exact solution"},
  };
  for (const auto& name : kCommands) app.add_subcommand(name, descriptions.at(name));

  std::string preset_name;
  std::string config_path;
  bool emit_config = false;
  app.add_option("--preset", preset_name, "named parameter set");
  app.add_option("--config", config_path, "JSON config; flags override its values");
  app.add_flag("--emit-config", emit_config, "write the effective config as JSON and exit");
  FlagSet flags(app);
  add_flags(flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  RunConfig c;
  for (const auto* sub : app.get_subcommands()) c.command = sub->get_name();
  try {
    Json file_config;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) {
        err << "error: cannot read " << config_path << '\n';
        return kExitUsage;
      }
      try {
        file_config = Json::parse(in);
      } catch (const Json::exception& e) {
        err << "error: " << config_path << ": " << e.what() << '\n';
        return kExitUsage;
      }
      if (preset_name.empty() && file_config.is_object() && file_config.contains("preset")) {
        preset_name = file_config["preset"].get<std::string>();
      }
    }
    if (!preset_name.empty()) apply_preset(preset_name, c);
    if (!config_path.empty()) update_from_json(file_config, c);
    flags.apply(c);
    resolve_defaults(c);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  if (emit_config) {
    const std::string text = to_json(c).dump(2) + "\n";
    if (c.out == "-" || c.out.empty()) {
      out << text;
    } else {
      std::ofstream file(c.out);
      if (!file) {
        err << "error: cannot write " << c.out << '\n';
        return kExitUsage;
      }
      file << text;
    }
    return kExitOk;
  }
  return run(c, out, err);
}

}  // namespace vortexflow::cli
