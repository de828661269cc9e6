#pragma once

// Named parameter sets used by the command-line tool and the tests.

#include <string>
#include <vector>

#include "vortexflow/conjecture3d.hpp"
#include "vortexflow/solution.hpp"

namespace vortexflow {

struct Preset {
  std::string name;
  RawParams params;
  std::string description;
  double t0 = 0.0;  // time at which (a0, a1) hold
};

const std::vector<Preset>& presets();

/// Throws Error(InvalidConfig) for an unknown name.
const Preset& preset_entry(const std::string& name);
RawParams preset(const std::string& name);

struct Preset3D {
  std::string name;
  Conjecture3DParams params;
  std::string description;
};

const std::vector<Preset3D>& presets_3d();

/// Throws Error(InvalidConfig) for an unknown name.
Conjecture3DParams preset_3d(const std::string& name);

}  // namespace vortexflow
