#pragma once

#include <string>
#include <vector>

namespace objf {

struct MaterialParams {
  double young_modulus = 0.0;   // Pa
  double poisson_ratio = 0.0;
  double density = 0.0;         // kg/m^3
  double rayleigh_alpha = 0.0;  // 1/s, mass-proportional damping
  double rayleigh_beta = 0.0;   // s, stiffness-proportional damping
};

void validate_material(const MaterialParams& m);

// Built-in engineering defaults for the named material set.
MaterialParams material_by_name(const std::string& name);
std::vector<std::string> material_names();

}  // namespace objf
