#include "objf/geometry/bvh.hpp"

#include <algorithm>

#include "objf/common/error.hpp"

namespace objf {

std::optional<RayHit> ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a,
                                   const Vec3& b, const Vec3& c) {
  // Moller-Trumbore.
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 pvec = dir.cross(e2);
  const double det = e1.dot(pvec);
  if (std::abs(det) < 1e-14) return std::nullopt;
  const double inv_det = 1.0 / det;
  const Vec3 tvec = origin - a;
  const double u = tvec.dot(pvec) * inv_det;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vec3 qvec = tvec.cross(e1);
  const double v = dir.dot(qvec) * inv_det;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  const double t = e2.dot(qvec) * inv_det;
  if (t <= 0.0) return std::nullopt;
  RayHit hit;
  hit.t = t;
  hit.point = origin + t * dir;
  hit.normal = triangle_normal(a, b, c);
  return hit;
}

std::optional<RayHit> raycast(const SurfaceMesh& mesh, const Vec3& origin, const Vec3& dir) {
  std::optional<RayHit> best;
  for (size_t i = 0; i < mesh.triangles.size(); ++i) {
    const Vec3i& t = mesh.triangles[i];
    auto hit = ray_triangle(origin, dir, mesh.vertices[t[0]], mesh.vertices[t[1]],
                            mesh.vertices[t[2]]);
    if (hit && hit->t > 1e-9 && (!best || hit->t < best->t)) {
      hit->triangle = static_cast<int>(i);
      best = hit;
    }
  }
  return best;
}

Bvh::Bvh(const SurfaceMesh& mesh) : mesh_(&mesh) {
  require(!mesh.triangles.empty(), ErrorKind::InvalidArgument, "geometry",
          "cannot build a BVH over an empty mesh");
  const int n = static_cast<int>(mesh.triangles.size());
  tri_order_.resize(n);
  std::vector<Vec3> centroids(n);
  for (int i = 0; i < n; ++i) {
    tri_order_[i] = i;
    const Vec3i& t = mesh.triangles[i];
    centroids[i] = (mesh.vertices[t[0]] + mesh.vertices[t[1]] + mesh.vertices[t[2]]) / 3.0;
  }
  nodes_.reserve(2 * n);
  build(tri_order_, 0, n, centroids);
}

int Bvh::build(std::vector<int>& tri_ids, int begin, int end, std::vector<Vec3>& centroids) {
  const int node_idx = static_cast<int>(nodes_.size());
  nodes_.emplace_back();

  Aabb box;
  for (int i = begin; i < end; ++i) {
    const Vec3i& t = mesh_->triangles[tri_ids[i]];
    box.expand(mesh_->vertices[t[0]]);
    box.expand(mesh_->vertices[t[1]]);
    box.expand(mesh_->vertices[t[2]]);
  }
  nodes_[node_idx].box = box;

  const int count = end - begin;
  if (count <= 4) {
    nodes_[node_idx].left = begin;
    nodes_[node_idx].count = count;
    return node_idx;
  }

  int axis = 0;
  Vec3 ext = box.extent();
  if (ext[1] > ext[axis]) axis = 1;
  if (ext[2] > ext[axis]) axis = 2;
  const int mid = begin + count / 2;
  std::nth_element(tri_ids.begin() + begin, tri_ids.begin() + mid, tri_ids.begin() + end,
                   [&](int a, int b) { return centroids[a][axis] < centroids[b][axis]; });

  int left = build(tri_ids, begin, mid, centroids);
  int right = build(tri_ids, mid, end, centroids);
  nodes_[node_idx].left = left;
  nodes_[node_idx].right = right;
  return node_idx;
}

std::optional<RayHit> Bvh::raycast(const Vec3& origin, const Vec3& dir, double t_min,
                                   double t_max) const {
  std::optional<RayHit> best;
  double closest = t_max;
  int stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (!node.box.intersect_ray(origin, dir, t_min, closest)) continue;
    if (node.count > 0) {
      for (int i = node.left; i < node.left + node.count; ++i) {
        const int tri = tri_order_[i];
        const Vec3i& t = mesh_->triangles[tri];
        auto hit = ray_triangle(origin, dir, mesh_->vertices[t[0]], mesh_->vertices[t[1]],
                                mesh_->vertices[t[2]]);
        if (hit && hit->t > t_min && hit->t < closest) {
          hit->triangle = tri;
          best = hit;
          closest = hit->t;
        }
      }
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  return best;
}

int Bvh::count_hits(const Vec3& origin, const Vec3& dir, double t_min) const {
  int count = 0;
  int stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (!node.box.intersect_ray(origin, dir, t_min, std::numeric_limits<double>::infinity())) {
      continue;
    }
    if (node.count > 0) {
      for (int i = node.left; i < node.left + node.count; ++i) {
        const Vec3i& t = mesh_->triangles[tri_order_[i]];
        auto hit = ray_triangle(origin, dir, mesh_->vertices[t[0]], mesh_->vertices[t[1]],
                                mesh_->vertices[t[2]]);
        if (hit && hit->t > t_min) ++count;
      }
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  return count;
}

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // Region classification after Ericson, Real-Time Collision Detection.
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  }

  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

ClosestPoint Bvh::closest_point(const Vec3& query) const {
  ClosestPoint best;
  best.distance = std::numeric_limits<double>::infinity();

  auto box_dist2 = [&](const Aabb& box) {
    Vec3 d = (box.b_min - query).cwiseMax(query - box.b_max).cwiseMax(Vec3::Zero());
    return d.squaredNorm();
  };

  // Depth-first with branch ordering by box distance.
  struct Entry {
    int node;
    double dist2;
  };
  Entry stack[64];
  int top = 0;
  stack[top++] = {0, box_dist2(nodes_[0].box)};
  double best2 = best.distance;
  while (top > 0) {
    Entry e = stack[--top];
    if (e.dist2 >= best2) continue;
    const Node& node = nodes_[e.node];
    if (node.count > 0) {
      for (int i = node.left; i < node.left + node.count; ++i) {
        const int tri = tri_order_[i];
        const Vec3i& t = mesh_->triangles[tri];
        Vec3 cp = closest_point_on_triangle(query, mesh_->vertices[t[0]], mesh_->vertices[t[1]],
                                            mesh_->vertices[t[2]]);
        double d2 = (cp - query).squaredNorm();
        if (d2 < best2) {
          best2 = d2;
          best.point = cp;
          best.triangle = tri;
        }
      }
    } else {
      Entry l{node.left, box_dist2(nodes_[node.left].box)};
      Entry r{node.right, box_dist2(nodes_[node.right].box)};
      if (l.dist2 > r.dist2) std::swap(l, r);  // nearer child popped first
      stack[top++] = r;
      stack[top++] = l;
    }
  }
  best.distance = std::sqrt(best2);
  return best;
}

}  // namespace objf
