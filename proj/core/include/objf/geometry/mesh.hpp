#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "objf/common/rng.hpp"

namespace objf {

using Vec3 = Eigen::Vector3d;
using Vec3i = Eigen::Vector3i;

struct Aabb {
  Vec3 b_min = Vec3::Constant(std::numeric_limits<double>::max());
  Vec3 b_max = Vec3::Constant(std::numeric_limits<double>::lowest());

  bool valid() const { return (b_min.array() <= b_max.array()).all(); }
  Vec3 extent() const { return b_max - b_min; }
  Vec3 center() const { return 0.5 * (b_min + b_max); }
  double diagonal() const { return extent().norm(); }
  double min_extent() const { return extent().minCoeff(); }

  void expand(const Vec3& p) {
    b_min = b_min.cwiseMin(p);
    b_max = b_max.cwiseMax(p);
  }
  void expand(const Aabb& other) {
    b_min = b_min.cwiseMin(other.b_min);
    b_max = b_max.cwiseMax(other.b_max);
  }
  bool contains(const Vec3& p, double tol = 0.0) const {
    return (p.array() >= b_min.array() - tol).all() &&
           (p.array() <= b_max.array() + tol).all();
  }

  // Ray/box overlap on [t0, t1]; returns the clipped interval if any.
  std::optional<std::pair<double, double>> intersect_ray(const Vec3& origin, const Vec3& dir,
                                                         double t0, double t1) const;
};

struct SurfaceMesh {
  std::vector<Vec3> vertices;
  std::vector<Vec3i> triangles;
  std::vector<Vec3> normals;  // per-vertex, unit length

  size_t vertex_count() const { return vertices.size(); }
  size_t triangle_count() const { return triangles.size(); }
};

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);
Vec3 triangle_normal(const Vec3& a, const Vec3& b, const Vec3& c);

Aabb aabb_of(const SurfaceMesh& mesh);
double surface_area(const SurfaceMesh& mesh);

// Signed volume enclosed by a closed surface (divergence theorem); positive
// for outward-oriented triangles.
double enclosed_volume(const SurfaceMesh& mesh);

// Area-weighted per-vertex normals; overwrites mesh.normals.
void compute_vertex_normals(SurfaceMesh& mesh);

struct MeshChecks {
  bool require_closed = false;  // reject boundary (single-use) edges
};

// Throws a validation error naming the defect: empty mesh, index out of
// range, degenerate triangle (area <= 1e-12), non-manifold edge (> 2 uses),
// or, when required, an open edge.
void validate_mesh(const SurfaceMesh& mesh, const MeshChecks& checks = {});

bool is_watertight(const SurfaceMesh& mesh);

void scale_mesh(SurfaceMesh& mesh, double factor);
void translate_mesh(SurfaceMesh& mesh, const Vec3& offset);

struct SurfacePoint {
  Vec3 position;
  Vec3 normal;
  int triangle = -1;
};

// Area-weighted uniform sampling over the surface.
class SurfaceSampler {
public:
  explicit SurfaceSampler(const SurfaceMesh& mesh);
  SurfacePoint sample(Rng& rng) const;
  double total_area() const { return total_area_; }

private:
  const SurfaceMesh& mesh_;
  std::vector<double> cumulative_;
  double total_area_ = 0.0;
};

}  // namespace objf
