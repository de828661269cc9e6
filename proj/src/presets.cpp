#include "vortexflow/presets.hpp"

namespace vortexflow {

const std::vector<Preset>& presets() {
  static const std::vector<Preset> table = [] {
    const ZhangZhengEmbedding zz = zhang_zheng_embedding(1.0);
    return std::vector<Preset>{
        {"zhang-zheng", zz.params.raw(), "gamma = 2 rotational field, a(t) = sqrt(t); (a0, a1) hold at t = 1", 1.0},
        {"periodic-demo", {1.5, 1.0, 1.0, -2.0, 1.0, 1.0, 0.0}, "breathing orbit between a = 1/3 and a = 1"},
        {"blowup-demo", {2.0, 1.0, 1.0, -2.0, 1.0, 1.0, 0.0}, "gamma = 2 collapse, a^2 = 1 - t^2"},
        {"gamma3-critical", {3.0, 1.0, 1.0, -1.0, 1.0, 2.0, 0.0}, "gamma = 3 start beyond the potential maximum at a = 1"},
        {"generic", {1.4, 1.0, 0.7, 0.9, 1.0, 1.0, 0.3}, "smooth compactly supported expanding vortex"},
        {"linear-collapse", {2.0, 1.0, 1.0, -1.0, 1.0, 1.0, -0.5}, "xi^2 + lambda = 0, a = 1 - t/2"},
        {"expanding", {2.0, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0}, "gamma = 2 closed form a^2 = 1 + t^2"},
        {"steady", {1.5, 1.0, 1.0, -2.0, 1.0, 0.5, 0.0}, "equilibrium at the potential minimum a = 1/2"},
    };
  }();
  return table;
}

const Preset& preset_entry(const std::string& name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p;
  }
  throw Error(ErrorCode::InvalidConfig, "unknown preset '" + name + "'");
}

RawParams preset(const std::string& name) { return preset_entry(name).params; }

const std::vector<Preset3D>& presets_3d() {
  static const std::vector<Preset3D> table = [] {
    Conjecture3DParams iso;

    Conjecture3DParams drift;
    drift.xi3 = 0.0;
    drift.d0 = {0.1, -0.1, 0.2};
    drift.d1 = {0.3, -0.2, 0.1};

    Conjecture3DParams aniso;
    aniso.a0 = {1.0, 1.2, 0.8};
    aniso.d1 = {0.1, 0.0, -0.05};
    return std::vector<Preset3D>{
        {"isotropic", iso, "equal axes at rest initially, no drift"},
        {"pure-drift", drift, "no separation constant: uniform state carried at constant velocity"},
        {"anisotropic-drift", aniso, "unequal axes with drift"},
    };
  }();
  return table;
}

Conjecture3DParams preset_3d(const std::string& name) {
  for (const auto& p : presets_3d()) {
    if (p.name == name) return p.params;
  }
  throw Error(ErrorCode::InvalidConfig, "unknown 3D preset '" + name + "'");
}

}  // namespace vortexflow
