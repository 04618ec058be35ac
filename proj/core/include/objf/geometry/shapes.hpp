#pragma once

#include "objf/geometry/mesh.hpp"

namespace objf {

// Axis-aligned box given by center and full side lengths; 12 triangles.
SurfaceMesh make_box(const Vec3& center, const Vec3& size);

// Icosahedron subdivided `subdivisions` times, projected to the sphere.
SurfaceMesh make_icosphere(const Vec3& center, double radius, int subdivisions);

// Closed cone: base disc of radius `radius` at z=0, apex at z=height,
// `segments` side facets.
SurfaceMesh make_cone(double radius, double height, int segments);

struct LBracketParams {
  // L-shaped footprint in the xy-plane: a leg along +x and a leg along +y.
  double leg_x = 0.12;       // extent of the x leg
  double leg_y = 0.08;       // extent of the y leg
  double width_x = 0.03;     // thickness of the x leg (along y)
  double width_y = 0.025;    // thickness of the y leg (along x)
  double height = 0.04;      // extrusion along z
  double top_taper = 0.75;   // top-face scale about its centroid; breaks the
                             // z-mirror symmetry so the shape has no
                             // congruent surface regions
};

SurfaceMesh make_l_bracket(const LBracketParams& params = {});

}  // namespace objf
