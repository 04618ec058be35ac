#include "objf/geometry/shapes.hpp"

#include <cmath>
#include <map>

#include "objf/common/error.hpp"

namespace objf {

SurfaceMesh make_box(const Vec3& center, const Vec3& size) {
  require((size.array() > 0.0).all(), ErrorKind::InvalidArgument, "geometry",
          "box size must be positive");
  SurfaceMesh mesh;
  Vec3 h = 0.5 * size;
  for (int i = 0; i < 8; ++i) {
    mesh.vertices.emplace_back(center[0] + ((i & 1) ? h[0] : -h[0]),
                               center[1] + ((i & 2) ? h[1] : -h[1]),
                               center[2] + ((i & 4) ? h[2] : -h[2]));
  }
  // Outward-wound faces; corner index bit k selects the +axis side.
  const int faces[6][4] = {
      {0, 4, 6, 2},  // -x
      {1, 3, 7, 5},  // +x
      {0, 1, 5, 4},  // -y
      {2, 6, 7, 3},  // +y
      {0, 2, 3, 1},  // -z
      {4, 5, 7, 6},  // +z
  };
  for (const auto& f : faces) {
    mesh.triangles.emplace_back(f[0], f[1], f[2]);
    mesh.triangles.emplace_back(f[0], f[2], f[3]);
  }
  compute_vertex_normals(mesh);
  return mesh;
}

SurfaceMesh make_icosphere(const Vec3& center, double radius, int subdivisions) {
  require(radius > 0.0, ErrorKind::InvalidArgument, "geometry", "radius must be positive");
  require(subdivisions >= 0 && subdivisions <= 7, ErrorKind::InvalidArgument, "geometry",
          "subdivisions out of range");

  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {
      {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1},
  };
  for (auto& v : verts) v.normalize();
  std::vector<Vec3i> tris = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
  };

  for (int level = 0; level < subdivisions; ++level) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      Vec3 m = (verts[a] + verts[b]).normalized();
      int idx = static_cast<int>(verts.size());
      verts.push_back(m);
      midpoint[key] = idx;
      return idx;
    };
    std::vector<Vec3i> next;
    next.reserve(tris.size() * 4);
    for (const auto& t : tris) {
      int ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
      next.push_back({t[0], ab, ca});
      next.push_back({t[1], bc, ab});
      next.push_back({t[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    tris = std::move(next);
  }

  SurfaceMesh mesh;
  mesh.vertices.reserve(verts.size());
  mesh.normals.reserve(verts.size());
  for (const auto& v : verts) {
    mesh.vertices.push_back(center + radius * v);
    mesh.normals.push_back(v);  // exact sphere normals
  }
  mesh.triangles = std::move(tris);
  return mesh;
}

SurfaceMesh make_cone(double radius, double height, int segments) {
  require(radius > 0.0 && height > 0.0, ErrorKind::InvalidArgument, "geometry",
          "cone dimensions must be positive");
  require(segments >= 3, ErrorKind::InvalidArgument, "geometry", "need at least 3 segments");
  SurfaceMesh mesh;
  const Vec3 apex(0, 0, height);
  const Vec3 base_center(0, 0, 0);
  for (int i = 0; i < segments; ++i) {
    double a = 2.0 * M_PI * i / segments;
    mesh.vertices.emplace_back(radius * std::cos(a), radius * std::sin(a), 0.0);
  }
  int apex_idx = static_cast<int>(mesh.vertices.size());
  mesh.vertices.push_back(apex);
  int center_idx = apex_idx + 1;
  mesh.vertices.push_back(base_center);
  for (int i = 0; i < segments; ++i) {
    int j = (i + 1) % segments;
    mesh.triangles.emplace_back(apex_idx, i, j);      // side, outward
    mesh.triangles.emplace_back(center_idx, j, i);    // base, facing -z
  }
  compute_vertex_normals(mesh);
  return mesh;
}

SurfaceMesh make_l_bracket(const LBracketParams& p) {
  require(p.width_y < p.leg_x && p.width_x < p.leg_y, ErrorKind::InvalidArgument, "geometry",
          "bracket leg widths must be smaller than leg extents");
  require(p.height > 0.0 && p.top_taper > 0.0 && p.top_taper <= 1.0, ErrorKind::InvalidArgument,
          "geometry", "bad bracket height or taper");

  // Counter-clockwise footprint outline.
  const double ax = p.leg_x, ay = p.leg_y, wx = p.width_x, wy = p.width_y;
  std::vector<Eigen::Vector2d> outline = {
      {0, 0}, {ax, 0}, {ax, wx}, {wy, wx}, {wy, ay}, {0, ay},
  };
  const int n = static_cast<int>(outline.size());

  Eigen::Vector2d top_centroid = Eigen::Vector2d::Zero();
  for (const auto& q : outline) top_centroid += q;
  top_centroid /= n;

  SurfaceMesh mesh;
  for (const auto& q : outline) mesh.vertices.emplace_back(q[0], q[1], 0.0);  // bottom ring
  for (const auto& q : outline) {
    Eigen::Vector2d s = top_centroid + p.top_taper * (q - top_centroid);
    mesh.vertices.emplace_back(s[0], s[1], p.height);  // tapered top ring
  }

  // The L footprint splits into two rectangles sharing the (wy,0)-(wy,wx)
  // seam: outline indices {0,1,2,3} and {0,3,4,5}.
  auto cap = [&](int base, bool flip) {
    const int quads[2][4] = {{0, 1, 2, 3}, {0, 3, 4, 5}};
    for (const auto& q : quads) {
      if (flip) {
        mesh.triangles.emplace_back(base + q[0], base + q[2], base + q[1]);
        mesh.triangles.emplace_back(base + q[0], base + q[3], base + q[2]);
      } else {
        mesh.triangles.emplace_back(base + q[0], base + q[1], base + q[2]);
        mesh.triangles.emplace_back(base + q[0], base + q[2], base + q[3]);
      }
    }
  };
  cap(0, true);  // bottom faces -z
  cap(n, false); // top faces +z
  for (int i = 0; i < n; ++i) {
    int j = (i + 1) % n;
    mesh.triangles.emplace_back(i, j, n + j);
    mesh.triangles.emplace_back(i, n + j, n + i);
  }

  require(enclosed_volume(mesh) > 0.0, ErrorKind::Numerical, "geometry",
          "bracket construction produced inverted orientation");
  compute_vertex_normals(mesh);
  return mesh;
}

}  // namespace objf
