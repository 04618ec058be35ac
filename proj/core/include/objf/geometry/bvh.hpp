#pragma once

#include <optional>

#include "objf/geometry/mesh.hpp"

namespace objf {

struct RayHit {
  double t = 0.0;
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::Zero();  // geometric triangle normal (winding side)
  int triangle = -1;
};

// Nearest intersection with t > 1e-9, scanning all triangles. Convenience
// path for small meshes; hot paths should build a Bvh once.
std::optional<RayHit> raycast(const SurfaceMesh& mesh, const Vec3& origin, const Vec3& dir);

std::optional<RayHit> ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a,
                                   const Vec3& b, const Vec3& c);

struct ClosestPoint {
  Vec3 point = Vec3::Zero();
  double distance = 0.0;
  int triangle = -1;
};

// Median-split bounding volume hierarchy over mesh triangles. The mesh must
// outlive the Bvh.
class Bvh {
public:
  explicit Bvh(const SurfaceMesh& mesh);

  const SurfaceMesh& mesh() const { return *mesh_; }
  const Aabb& bounds() const { return nodes_[0].box; }

  std::optional<RayHit> raycast(const Vec3& origin, const Vec3& dir,
                                double t_min = 1e-9,
                                double t_max = std::numeric_limits<double>::infinity()) const;

  // Number of surface crossings with t > t_min, counting every hit. Used for
  // inside/outside parity tests.
  int count_hits(const Vec3& origin, const Vec3& dir, double t_min = 1e-9) const;

  ClosestPoint closest_point(const Vec3& query) const;

private:
  struct Node {
    Aabb box;
    int left = -1;    // internal: child index; leaf: first triangle slot
    int count = 0;    // leaf triangle count; 0 for internal nodes
    int right = -1;
  };

  int build(std::vector<int>& tri_ids, int begin, int end, std::vector<Vec3>& centroids);

  const SurfaceMesh* mesh_;
  std::vector<Node> nodes_;
  std::vector<int> tri_order_;
};

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

}  // namespace objf
