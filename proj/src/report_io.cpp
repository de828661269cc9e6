#include "vortexflow/report_io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

namespace vortexflow {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw Error(ErrorCode::InvalidConfig, "not a number: '" + text + "'");
  }
  return v;
}

// Non-finite values have no JSON literal; they are written as null (or a string).
Json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return nullptr;
  return format_double(v);
}

template <class T>
Json opt(const std::optional<T>& v) {
  if (!v) return nullptr;
  return num(*v);
}

Json vec3(const Vec3& v) { return Json::array({num(v[0]), num(v[1]), num(v[2])}); }

// Reads the keys of `j` into the bound fields; rejects keys that are not bound.
class Binder {
 public:
  explicit Binder(const Json& j, std::string what) : j_(j), what_(std::move(what)) {
    if (!j_.is_object()) throw Error(ErrorCode::InvalidConfig, what_ + " must be a JSON object");
  }
  ~Binder() = default;
  Binder(const Binder&) = delete;
  Binder& operator=(const Binder&) = delete;

  Binder& bind(const char* key, double& v) {
    seen_.insert(key);
    if (const auto it = j_.find(key); it != j_.end()) v = to_double(*it, key);
    return *this;
  }
  Binder& bind(const char* key, int& v) {
    seen_.insert(key);
    if (const auto it = j_.find(key); it != j_.end()) {
      if (!it->is_number_integer()) throw bad(key);
      v = it->get<int>();
    }
    return *this;
  }
  Binder& bind(const char* key, std::size_t& v) {
    seen_.insert(key);
    if (const auto it = j_.find(key); it != j_.end()) {
      if (!it->is_number_unsigned()) throw bad(key);
      v = it->get<std::size_t>();
    }
    return *this;
  }
  Binder& bind(const char* key, Vec3& v) {
    seen_.insert(key);
    if (const auto it = j_.find(key); it != j_.end()) {
      if (!it->is_array() || it->size() != 3) throw bad(key);
      for (std::size_t i = 0; i < 3; ++i) v[i] = to_double((*it)[i], key);
    }
    return *this;
  }
  Binder& bind_enum(const char* key, RegionKind& v) {
    seen_.insert(key);
    if (const auto it = j_.find(key); it != j_.end()) {
      if (*it == "annulus") {
        v = RegionKind::Annulus;
      } else if (*it == "box") {
        v = RegionKind::Box;
      } else {
        throw bad(key);
      }
    }
    return *this;
  }
  void finish() const {
    for (const auto& item : j_.items()) {
      if (seen_.count(item.key()) == 0) {
        throw Error(ErrorCode::InvalidConfig, "unknown key '" + item.key() + "' in " + what_);
      }
    }
  }

 private:
  [[nodiscard]] Error bad(const std::string& key) const {
    return Error(ErrorCode::InvalidConfig, "bad value for '" + key + "' in " + what_);
  }
  double to_double(const Json& v, const std::string& key) const {
    if (v.is_number()) return v.get<double>();
    if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
    if (v.is_string()) return parse_double(v.get<std::string>());
    throw bad(key);
  }

  const Json& j_;
  std::string what_;
  std::set<std::string> seen_;
};

Json equation_json(const EquationResidual& e) {
  return {{"name", e.name},
          {"max_abs", num(e.max_abs)},
          {"mean_abs", num(e.mean_abs)},
          {"scale", num(e.scale)},
          {"normalized_max", num(e.normalized_max)},
          {"normalized_mean", num(e.normalized_mean)},
          {"where", e.where}};
}

}  // namespace

Json to_json(const RawParams& p) {
  return {{"gamma", num(p.gamma)}, {"K", num(p.K)},         {"xi", num(p.xi)}, {"lambda", num(p.lambda)},
          {"alpha", num(p.alpha)}, {"a0", num(p.a0)},       {"a1", num(p.a1)}};
}

Json to_json(const IntegrationConfig& c) {
  return {{"rel_tol", num(c.rel_tol)},
          {"abs_tol", num(c.abs_tol)},
          {"max_step", num(c.max_step)},
          {"collapse_epsilon", num(c.collapse_epsilon)},
          {"t_end", num(c.t_end)},
          {"max_steps", c.max_steps}};
}

Json to_json(const GridSpec& g) {
  return {{"region", g.region == RegionKind::Annulus ? "annulus" : "box"},
          {"r_lo", num(g.r_lo)},
          {"r_hi", num(g.r_hi)},
          {"n_r", g.n_r},
          {"n_theta", g.n_theta},
          {"x_lo", num(g.x_lo)},
          {"x_hi", num(g.x_hi)},
          {"y_lo", num(g.y_lo)},
          {"y_hi", num(g.y_hi)},
          {"nx", g.nx},
          {"ny", g.ny},
          {"h", num(g.h)},
          {"h_t", num(g.h_t)},
          {"fd_order", g.fd_order},
          {"support_margin", num(g.support_margin)}};
}

Json to_json(const Grid3DSpec& g) {
  return {{"half_width", vec3(g.half_width)}, {"n", g.n},
          {"h", num(g.h)},                    {"h_t", num(g.h_t)},
          {"fd_order", g.fd_order},           {"support_margin", num(g.support_margin)}};
}

Json to_json(const FvConfig& c) {
  return {{"x_lo", num(c.box.x_lo)},   {"x_hi", num(c.box.x_hi)}, {"y_lo", num(c.box.y_lo)},
          {"y_hi", num(c.box.y_hi)},   {"resolution", c.resolution}, {"cfl", num(c.cfl)},
          {"rho_floor", num(c.rho_floor)}, {"t0", num(c.t0)},       {"t_end", num(c.t_end)}};
}

Json to_json(const Conjecture3DParams& p) {
  return {{"gamma", num(p.gamma)}, {"K", num(p.K)},       {"xi3", num(p.xi3)}, {"alpha3", num(p.alpha3)},
          {"a0", vec3(p.a0)},      {"a1", vec3(p.a1)},    {"d0", vec3(p.d0)},  {"d1", vec3(p.d1)}};
}

Json to_json(const Regime& r) {
  Json crit = {{"a_max", opt(r.critical.a_max)},
               {"F_pot_at_a_max", opt(r.critical.F_pot_at_a_max)},
               {"a_eq", opt(r.critical.a_eq)},
               {"F_pot_at_a_eq", opt(r.critical.F_pot_at_a_eq)},
               {"blowup_threshold", opt(r.critical.blowup_threshold)}};
  Json j = {{"kind", to_string(r.kind)},
            {"branch", r.branch},
            {"energy",
             {{"E", num(r.initial_energy.E)},
              {"F_kin", num(r.initial_energy.F_kin)},
              {"F_pot", num(r.initial_energy.F_pot)}}},
            {"critical", crit},
            {"period", opt(r.period)},
            {"period_error", opt(r.period_error)},
            {"a_min", opt(r.a_min)},
            {"a_max", opt(r.a_max_turning)}};
  if (r.blowup) {
    j["blowup"] = {{"t_star", num(r.blowup->t_star)},
                   {"error_bar", num(r.blowup->error_bar)},
                   {"closed_form", r.blowup->closed_form}};
  } else {
    j["blowup"] = nullptr;
  }
  j["note"] = r.note;
  return j;
}

Json to_json(const PeriodEstimate& p) {
  return {{"period", num(p.period)}, {"error_estimate", num(p.error_estimate)}, {"levels", p.levels}};
}

Json to_json(const CertificationReport& r) {
  return {{"symbolic_verdict", r.symbolic_verdict},
          {"numeric_verdict", r.numeric_verdict},
          {"consistent", r.consistent},
          {"horizon", num(r.horizon)},
          {"observed_collapse", opt(r.observed_collapse)},
          {"return_error", opt(r.return_error)},
          {"detail", r.detail}};
}

Json to_json(const ResidualReport& r) {
  Json eqs = Json::array();
  for (const auto& e : r.equations) eqs.push_back(equation_json(e));
  Json j = {{"normalized_max", num(r.normalized_max())},
            {"equations", eqs},
            {"n_points", r.n_points},
            {"h", num(r.h)},
            {"h_t", num(r.h_t)},
            {"viscous_normalized_max", num(r.viscous_normalized_max)}};
  if (!r.ladder_h.empty()) {
    j["ladder"] = {{"h", r.ladder_h}, {"residual", r.ladder_residual}, {"order", opt(r.order)}};
  }
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

Json to_json(const ConvergenceResult& c) {
  return {{"h", c.h}, {"residual", c.residual}, {"order", opt(c.order)}, {"not_applicable", c.not_applicable}};
}

Json to_json(const ConjectureReport& r) {
  return {{"verdict", r.verdict},
          {"pass", r.pass},
          {"tolerance", num(r.tolerance)},
          {"invariant_drift", num(r.invariant_drift)},
          {"convergence", to_json(r.convergence)},
          {"finest", to_json(r.finest)},
          {"note", r.note}};
}

Json to_json(const ErrorReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"resolution", row.resolution},
                    {"L1_rho", num(row.l1_rho)},
                    {"Linf_rho", num(row.linf_rho)},
                    {"L1_momentum", num(row.l1_momentum)},
                    {"Linf_momentum", num(row.linf_momentum)},
                    {"order_L1_rho", opt(row.order_l1_rho)},
                    {"steps", row.steps},
                    {"floored", row.floor_count}});
  }
  return {{"rows", rows}};
}

void update_from_json(const Json& j, RawParams& p) {
  Binder b(j, "params");
  b.bind("gamma", p.gamma).bind("K", p.K).bind("xi", p.xi).bind("lambda", p.lambda);
  b.bind("alpha", p.alpha).bind("a0", p.a0).bind("a1", p.a1);
  b.finish();
}

void update_from_json(const Json& j, IntegrationConfig& c) {
  Binder b(j, "integration");
  b.bind("rel_tol", c.rel_tol).bind("abs_tol", c.abs_tol).bind("max_step", c.max_step);
  b.bind("collapse_epsilon", c.collapse_epsilon).bind("t_end", c.t_end).bind("max_steps", c.max_steps);
  b.finish();
}

void update_from_json(const Json& j, GridSpec& g) {
  Binder b(j, "grid");
  b.bind_enum("region", g.region);
  b.bind("r_lo", g.r_lo).bind("r_hi", g.r_hi).bind("n_r", g.n_r).bind("n_theta", g.n_theta);
  b.bind("x_lo", g.x_lo).bind("x_hi", g.x_hi).bind("y_lo", g.y_lo).bind("y_hi", g.y_hi);
  b.bind("nx", g.nx).bind("ny", g.ny).bind("h", g.h).bind("h_t", g.h_t);
  b.bind("fd_order", g.fd_order).bind("support_margin", g.support_margin);
  b.finish();
}

void update_from_json(const Json& j, Grid3DSpec& g) {
  Binder b(j, "grid3d");
  b.bind("half_width", g.half_width).bind("n", g.n).bind("h", g.h).bind("h_t", g.h_t);
  b.bind("fd_order", g.fd_order).bind("support_margin", g.support_margin);
  b.finish();
}

void update_from_json(const Json& j, FvConfig& c) {
  Binder b(j, "fv");
  b.bind("x_lo", c.box.x_lo).bind("x_hi", c.box.x_hi).bind("y_lo", c.box.y_lo).bind("y_hi", c.box.y_hi);
  b.bind("resolution", c.resolution).bind("cfl", c.cfl).bind("rho_floor", c.rho_floor);
  b.bind("t0", c.t0).bind("t_end", c.t_end);
  b.finish();
}

void update_from_json(const Json& j, Conjecture3DParams& p) {
  Binder b(j, "params3d");
  b.bind("gamma", p.gamma).bind("K", p.K).bind("xi3", p.xi3).bind("alpha3", p.alpha3);
  b.bind("a0", p.a0).bind("a1", p.a1).bind("d0", p.d0).bind("d1", p.d1);
  b.finish();
}

namespace {

void write_row(std::ostream& out, std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    if (!first) out << ',';
    out << format_double(v);
    first = false;
  }
  out << '\n';
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "t,a,adot,E,F_kin,F_pot\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const ScaleState& s = traj.nodes()[i];
    const EnergySplit& e = traj.energies()[i];
    write_row(out, {s.t, s.a, s.adot, e.E, e.F_kin, e.F_pot});
  }
}

void write_flow_csv(std::ostream& out, const std::vector<FlowRow>& rows) {
  out << "x,y,rho,u1,u2,p\n";
  for (const auto& r : rows) write_row(out, {r.x, r.y, r.sample.rho, r.sample.u1, r.sample.u2, r.sample.p});
}

std::vector<FlowRow> read_flow_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "x,y,rho,u1,u2,p") {
    throw Error(ErrorCode::InvalidConfig, "missing flow CSV header");
  }
  std::vector<FlowRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) v.push_back(parse_double(cell));
    if (v.size() != 6) throw Error(ErrorCode::InvalidConfig, "flow CSV row needs 6 columns: " + line);
    rows.push_back({v[0], v[1], {v[2], v[3], v[4], v[5]}});
  }
  return rows;
}

void write_error_table_csv(std::ostream& out, const ErrorReport& report) {
  out << "resolution,L1_rho,Linf_rho,L1_momentum,Linf_momentum,order,steps,floored\n";
  for (const auto& r : report.rows) {
    out << r.resolution << ',' << format_double(r.l1_rho) << ',' << format_double(r.linf_rho) << ','
        << format_double(r.l1_momentum) << ',' << format_double(r.linf_momentum) << ','
        << (r.order_l1_rho ? format_double(*r.order_l1_rho) : "") << ',' << r.steps << ','
        << r.floor_count << '\n';
  }
}

void write_cells_csv(std::ostream& out, const ConservativeField& field) {
  out << "x,y,rho,m1,m2\n";
  for (int j = 0; j < field.ny(); ++j) {
    for (int i = 0; i < field.nx(); ++i) {
      const std::size_t k = field.index(i, j);
      write_row(out, {field.x(i), field.y(j), field.rho[k], field.m1[k], field.m2[k]});
    }
  }
}

}  // namespace vortexflow
