#pragma once

#include <string>

#include "objf/geometry/mesh.hpp"

namespace objf {

// Wavefront OBJ, triangles only (polygon faces are fan-triangulated).
// Supported records: v, vn, f (with 1-based `v`, `v//vn`, or `v/vt/vn`
// references). The loaded mesh is validated; normals are computed when the
// file does not provide a full per-vertex set.
SurfaceMesh load_mesh(const std::string& path);

void save_mesh(const SurfaceMesh& mesh, const std::string& path);

}  // namespace objf
