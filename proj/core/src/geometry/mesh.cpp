#include "objf/geometry/mesh.hpp"

#include <algorithm>
#include <map>

#include "objf/common/error.hpp"

namespace objf {

namespace {
constexpr const char* kModule = "geometry";
}

std::optional<std::pair<double, double>> Aabb::intersect_ray(const Vec3& origin, const Vec3& dir,
                                                             double t0, double t1) const {
  for (int a = 0; a < 3; ++a) {
    double inv = 1.0 / dir[a];
    double tn = (b_min[a] - origin[a]) * inv;
    double tf = (b_max[a] - origin[a]) * inv;
    if (inv < 0.0) std::swap(tn, tf);
    t0 = std::max(t0, tn);
    t1 = std::min(t1, tf);
    if (t1 < t0) return std::nullopt;
  }
  return std::make_pair(t0, t1);
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

Vec3 triangle_normal(const Vec3& a, const Vec3& b, const Vec3& c) {
  Vec3 n = (b - a).cross(c - a);
  double len = n.norm();
  if (len <= 0.0) return Vec3::Zero();
  return n / len;
}

Aabb aabb_of(const SurfaceMesh& mesh) {
  Aabb box;
  for (const auto& v : mesh.vertices) box.expand(v);
  require(box.valid(), ErrorKind::Validation, kModule, "empty mesh has no bounding box");
  return box;
}

double surface_area(const SurfaceMesh& mesh) {
  double area = 0.0;
  for (const auto& t : mesh.triangles) {
    area += triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
  }
  return area;
}

double enclosed_volume(const SurfaceMesh& mesh) {
  double vol = 0.0;
  for (const auto& t : mesh.triangles) {
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    vol += a.dot(b.cross(c));
  }
  return vol / 6.0;
}

void compute_vertex_normals(SurfaceMesh& mesh) {
  mesh.normals.assign(mesh.vertices.size(), Vec3::Zero());
  for (const auto& t : mesh.triangles) {
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    Vec3 n = (b - a).cross(c - a);  // length = 2*area, giving area weighting
    mesh.normals[t[0]] += n;
    mesh.normals[t[1]] += n;
    mesh.normals[t[2]] += n;
  }
  for (auto& n : mesh.normals) {
    double len = n.norm();
    if (len > 0.0) n /= len;
  }
}

namespace {

// Undirected edge use counts keyed by sorted vertex pair.
std::map<std::pair<int, int>, int> edge_counts(const SurfaceMesh& mesh) {
  std::map<std::pair<int, int>, int> counts;
  for (const auto& t : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      int a = t[e], b = t[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      counts[{a, b}]++;
    }
  }
  return counts;
}

}  // namespace

void validate_mesh(const SurfaceMesh& mesh, const MeshChecks& checks) {
  require(!mesh.vertices.empty() && !mesh.triangles.empty(), ErrorKind::Validation, kModule,
          "empty mesh");
  const int v_count = static_cast<int>(mesh.vertices.size());
  for (size_t i = 0; i < mesh.triangles.size(); ++i) {
    const Vec3i& t = mesh.triangles[i];
    for (int k = 0; k < 3; ++k) {
      if (t[k] < 0 || t[k] >= v_count) {
        raise(ErrorKind::Validation, kModule,
              "triangle " + std::to_string(i) + " references vertex " + std::to_string(t[k]) +
                  " of " + std::to_string(v_count));
      }
    }
    double area = triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
    if (area <= 1e-12) {
      raise(ErrorKind::Validation, kModule,
            "triangle " + std::to_string(i) + " is degenerate (area " + std::to_string(area) + ")");
    }
  }
  if (!mesh.normals.empty()) {
    require(mesh.normals.size() == mesh.vertices.size(), ErrorKind::Validation, kModule,
            "normal count does not match vertex count");
    for (size_t i = 0; i < mesh.normals.size(); ++i) {
      if (std::abs(mesh.normals[i].norm() - 1.0) > 1e-6) {
        raise(ErrorKind::Validation, kModule,
              "normal " + std::to_string(i) + " is not unit length");
      }
    }
  }
  for (const auto& [edge, count] : edge_counts(mesh)) {
    if (count > 2) {
      raise(ErrorKind::Validation, kModule,
            "non-manifold edge (" + std::to_string(edge.first) + "," +
                std::to_string(edge.second) + ") used by " + std::to_string(count) + " triangles");
    }
    if (checks.require_closed && count != 2) {
      raise(ErrorKind::Validation, kModule,
            "open edge (" + std::to_string(edge.first) + "," + std::to_string(edge.second) +
                "); surface is not watertight");
    }
  }
}

bool is_watertight(const SurfaceMesh& mesh) {
  if (mesh.triangles.empty()) return false;
  for (const auto& [edge, count] : edge_counts(mesh)) {
    if (count != 2) return false;
  }
  return true;
}

void scale_mesh(SurfaceMesh& mesh, double factor) {
  require(factor > 0.0, ErrorKind::InvalidArgument, kModule, "scale factor must be positive");
  for (auto& v : mesh.vertices) v *= factor;
}

void translate_mesh(SurfaceMesh& mesh, const Vec3& offset) {
  for (auto& v : mesh.vertices) v += offset;
}

SurfaceSampler::SurfaceSampler(const SurfaceMesh& mesh) : mesh_(mesh) {
  cumulative_.reserve(mesh.triangles.size());
  for (const auto& t : mesh.triangles) {
    total_area_ += triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
    cumulative_.push_back(total_area_);
  }
  require(total_area_ > 0.0, ErrorKind::Validation, kModule, "mesh has zero surface area");
}

SurfacePoint SurfaceSampler::sample(Rng& rng) const {
  double u = rng.uniform() * total_area_;
  auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
  int tri = static_cast<int>(std::min<size_t>(it - cumulative_.begin(), cumulative_.size() - 1));
  const Vec3i& t = mesh_.triangles[tri];
  double r1 = std::sqrt(rng.uniform());
  double r2 = rng.uniform();
  double wa = 1.0 - r1;
  double wb = r1 * (1.0 - r2);
  double wc = r1 * r2;
  SurfacePoint p;
  p.position = wa * mesh_.vertices[t[0]] + wb * mesh_.vertices[t[1]] + wc * mesh_.vertices[t[2]];
  p.normal = triangle_normal(mesh_.vertices[t[0]], mesh_.vertices[t[1]], mesh_.vertices[t[2]]);
  p.triangle = tri;
  return p;
}

}  // namespace objf
