#pragma once

#include <vector>

#include "objf/geometry/mesh.hpp"

namespace objf {

struct VoxelGrid {
  Vec3i resolution = Vec3i::Ones();
  Aabb bounds;

  Vec3 cell_extent() const {
    return bounds.extent().cwiseQuotient(resolution.cast<double>());
  }
  int cell_count() const { return resolution[0] * resolution[1] * resolution[2]; }
  int linear_index(const Vec3i& c) const {
    return (c[2] * resolution[1] + c[1]) * resolution[0] + c[0];
  }
  Aabb cell_bounds(const Vec3i& c) const {
    Vec3 ext = cell_extent();
    Aabb box;
    box.b_min = bounds.b_min + ext.cwiseProduct(c.cast<double>());
    box.b_max = box.b_min + ext;
    return box;
  }
};

// Componentwise binning with exact upper-boundary points clamped into the
// last cell. Points outside the bounds raise an out-of-domain error.
Vec3i grid_index_3d(const Vec3& x, const VoxelGrid& grid);
int grid_index(const Vec3& x, const VoxelGrid& grid);

struct TetMesh {
  std::vector<Vec3> vertices;
  std::vector<Eigen::Vector4i> tets;  // positively oriented
  SurfaceMesh surface;                // extracted boundary
  std::vector<int> surface_to_volume; // surface vertex -> volume vertex index

  size_t vertex_count() const { return vertices.size(); }
  size_t tet_count() const { return tets.size(); }
};

double tet_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);
double total_volume(const TetMesh& mesh);

// Voxelizes the interior (voxel-center ray-parity inside test with one fixed
// jittered direction), keeps the largest face-connected voxel component, and
// splits each interior voxel into 6 positively oriented tets. The boundary
// faces are extracted into an outward-oriented closed surface.
TetMesh tetrahedralize(const SurfaceMesh& surface, double cell_size);

// Rebuilds mesh.surface and mesh.surface_to_volume from the tets (faces used
// by exactly one tet, wound outward). Requires positively oriented tets.
void extract_boundary_surface(TetMesh& mesh);

}  // namespace objf
