#pragma once

// Command-line front end: configuration assembly (preset, then JSON file, then flags)
// and the command drivers. Exit codes: 0 success or PASS, 1 domain error or FAIL,
// 2 usage or I/O error.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vortexflow/conjecture3d.hpp"
#include "vortexflow/fv.hpp"
#include "vortexflow/report_io.hpp"
#include "vortexflow/residual.hpp"

namespace vortexflow::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

struct RunConfig {
  std::string command;
  std::string preset;
  RawParams params;
  double t0 = 0.0;  // time at which (a0, a1) hold
  IntegrationConfig integration;
  GridSpec grid;
  /// Evaluation time; when unset each command picks its own default.
  std::optional<double> time;
  std::string target = "family";  // verify: family | navier-stokes | zz | zz-as-printed | generic-g
  double mu = 1.0;
  double viscous_h = 0.0625;
  std::vector<double> ladder;
  double tolerance = 1e-6;
  double horizon = 10.0;
  unsigned seed = 1;
  int count = 5;
  std::string case3d = "all";  // isotropic | pure-drift | anisotropic-drift | all | custom
  Conjecture3DParams params3d;
  Grid3DSpec grid3d;
  std::vector<double> ladder3d{2e-3, 1e-3, 5e-4};
  FvConfig fv;
  std::vector<int> resolutions{64, 128, 256};
  std::string cells_path;
  std::string out = "-";
  std::string format;  // csv | json; empty picks the command default
};

Json to_json(const RunConfig& c);
/// Applies the keys present in `j` on top of `c`.
void update_from_json(const Json& j, RunConfig& c);
/// Sets parameters and start time from a named preset.
void apply_preset(const std::string& name, RunConfig& c);

/// Fills the command-dependent defaults (time, format).
void resolve_defaults(RunConfig& c);

/// Runs a resolved configuration, writing the report to `out` and diagnostics to `err`.
int run(const RunConfig& c, std::ostream& out, std::ostream& err);

/// Full entry point: parses argv, assembles the configuration and runs it.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vortexflow::cli
