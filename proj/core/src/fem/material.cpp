#include "objf/fem/material.hpp"

#include <array>
#include <utility>

#include "objf/common/error.hpp"

namespace objf {

namespace {

struct NamedMaterial {
  const char* name;
  MaterialParams params;
};

// Young's modulus / Poisson ratio / density are standard handbook values;
// the Rayleigh pair is shared across materials and tuned for audible decay.
constexpr double kAlpha = 6.0;
constexpr double kBeta = 1e-7;

const std::array<NamedMaterial, 7> kMaterials = {{
    {"steel", {2.0e11, 0.29, 7850.0, kAlpha, kBeta}},
    {"ceramic", {7.2e10, 0.19, 2700.0, kAlpha, kBeta}},
    {"wood", {1.1e10, 0.35, 750.0, kAlpha, kBeta}},
    {"glass", {6.8e10, 0.22, 2450.0, kAlpha, kBeta}},
    {"plastic", {2.4e9, 0.38, 1070.0, kAlpha, kBeta}},
    {"iron", {1.9e11, 0.26, 7200.0, kAlpha, kBeta}},
    {"polycarbonate", {2.3e9, 0.37, 1200.0, kAlpha, kBeta}},
}};

}  // namespace

void validate_material(const MaterialParams& m) {
  require(m.young_modulus > 0.0, ErrorKind::Validation, "material",
          "Young's modulus must be positive");
  require(m.poisson_ratio >= 0.0 && m.poisson_ratio < 0.5, ErrorKind::Validation, "material",
          "Poisson ratio must lie in [0, 0.5)");
  require(m.density > 0.0, ErrorKind::Validation, "material", "density must be positive");
  require(m.rayleigh_alpha >= 0.0 && m.rayleigh_beta >= 0.0, ErrorKind::Validation, "material",
          "Rayleigh damping coefficients must be non-negative");
}

MaterialParams material_by_name(const std::string& name) {
  for (const auto& entry : kMaterials) {
    if (name == entry.name) return entry.params;
  }
  std::string known;
  for (const auto& entry : kMaterials) {
    if (!known.empty()) known += ", ";
    known += entry.name;
  }
  raise(ErrorKind::InvalidArgument, "material",
        "unknown material '" + name + "' (known: " + known + ")");
}

std::vector<std::string> material_names() {
  std::vector<std::string> names;
  names.reserve(kMaterials.size());
  for (const auto& entry : kMaterials) names.emplace_back(entry.name);
  return names;
}

}  // namespace objf
