#pragma once

// JSON reports and configs, CSV fields and tables. Numbers are written as the shortest
// decimal that reads back to the identical double.

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "vortexflow/conjecture3d.hpp"
#include "vortexflow/emden.hpp"
#include "vortexflow/fv.hpp"
#include "vortexflow/regimes.hpp"
#include "vortexflow/residual.hpp"

namespace vortexflow {

using Json = nlohmann::ordered_json;

std::string format_double(double v);

Json to_json(const RawParams& p);
Json to_json(const IntegrationConfig& c);
Json to_json(const GridSpec& g);
Json to_json(const Grid3DSpec& g);
Json to_json(const FvConfig& c);
Json to_json(const Conjecture3DParams& p);
Json to_json(const Regime& r);
Json to_json(const PeriodEstimate& p);
Json to_json(const CertificationReport& r);
Json to_json(const ResidualReport& r);
Json to_json(const ConvergenceResult& c);
Json to_json(const ConjectureReport& r);
Json to_json(const ErrorReport& r);

/// Overwrite only the fields present in `j`; unknown keys throw Error(InvalidConfig).
void update_from_json(const Json& j, RawParams& p);
void update_from_json(const Json& j, IntegrationConfig& c);
void update_from_json(const Json& j, GridSpec& g);
void update_from_json(const Json& j, Grid3DSpec& g);
void update_from_json(const Json& j, FvConfig& c);
void update_from_json(const Json& j, Conjecture3DParams& p);

/// Columns t, a, adot, E, F_kin, F_pot, one row per integrator node.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

struct FlowRow {
  double x = 0.0;
  double y = 0.0;
  FlowSample sample;
};

/// Columns x, y, rho, u1, u2, p.
void write_flow_csv(std::ostream& out, const std::vector<FlowRow>& rows);
/// Inverse of write_flow_csv. Throws Error(InvalidConfig) on malformed input.
std::vector<FlowRow> read_flow_csv(std::istream& in);

/// Columns resolution, L1_rho, Linf_rho, L1_momentum, Linf_momentum, order, steps, floored.
void write_error_table_csv(std::ostream& out, const ErrorReport& report);

/// Columns x, y, rho, m1, m2 over interior cells.
void write_cells_csv(std::ostream& out, const ConservativeField& field);

}  // namespace vortexflow
