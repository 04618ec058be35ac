#include "objf/geometry/voxelize.hpp"

#include <cmath>
#include <deque>
#include <unordered_map>

#include "objf/common/error.hpp"
#include "objf/common/log.hpp"
#include "objf/common/rng.hpp"
#include "objf/geometry/bvh.hpp"

namespace objf {

namespace {
constexpr const char* kModule = "geometry";
}

Vec3i grid_index_3d(const Vec3& x, const VoxelGrid& grid) {
  const Vec3& lo = grid.bounds.b_min;
  const Vec3& hi = grid.bounds.b_max;
  for (int a = 0; a < 3; ++a) {
    if (x[a] < lo[a] || x[a] > hi[a]) {
      raise(ErrorKind::Validation, kModule,
            "point outside grid bounds on axis " + std::to_string(a));
    }
  }
  Vec3 cell = grid.cell_extent();
  Vec3i idx;
  for (int a = 0; a < 3; ++a) {
    int i = static_cast<int>(std::floor((x[a] - lo[a]) / cell[a]));
    // Exact upper boundary (and any floating spill) belongs to the last cell.
    idx[a] = std::min(std::max(i, 0), grid.resolution[a] - 1);
  }
  return idx;
}

int grid_index(const Vec3& x, const VoxelGrid& grid) {
  return grid.linear_index(grid_index_3d(x, grid));
}

double tet_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return (b - a).cross(c - a).dot(d - a) / 6.0;
}

double total_volume(const TetMesh& mesh) {
  double vol = 0.0;
  for (const auto& t : mesh.tets) {
    vol += tet_volume(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]],
                      mesh.vertices[t[3]]);
  }
  return vol;
}

namespace {

// Kuhn subdivision: six tets around the main diagonal (0,0,0)-(1,1,1).
// Axis orders; each row is the insertion order of unit steps.
constexpr int kAxisPerms[6][3] = {
    {0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0},
};

uint64_t pack_ijk(int i, int j, int k) {
  return (static_cast<uint64_t>(i) << 42) | (static_cast<uint64_t>(j) << 21) |
         static_cast<uint64_t>(k);
}

uint64_t pack_face(int a, int b, int c) {
  int v[3] = {a, b, c};
  std::sort(v, v + 3);
  return (static_cast<uint64_t>(v[0]) << 42) | (static_cast<uint64_t>(v[1]) << 21) |
         static_cast<uint64_t>(v[2]);
}

}  // namespace

TetMesh tetrahedralize(const SurfaceMesh& surface, double cell_size) {
  validate_mesh(surface, {.require_closed = true});
  Aabb box = aabb_of(surface);
  require(cell_size > 0.0 && cell_size < box.min_extent(), ErrorKind::InvalidArgument, kModule,
          "cell_size must be positive and smaller than the minimum bounding-box extent");

  Vec3i dims;
  for (int a = 0; a < 3; ++a) {
    dims[a] = std::max(1, static_cast<int>(std::ceil(box.extent()[a] / cell_size - 1e-9)));
    require(dims[a] < (1 << 20), ErrorKind::InvalidArgument, kModule, "voxel grid too large");
  }

  Bvh bvh(surface);
  // One fixed jittered ray direction for the parity test keeps voxel
  // classification deterministic while avoiding edge-grazing directions.
  Rng jitter_rng(0x5EED);
  Vec3 parity_dir(jitter_rng.normal(), jitter_rng.normal(), jitter_rng.normal());
  parity_dir.normalize();

  const int nx = dims[0], ny = dims[1], nz = dims[2];
  auto voxel_id = [&](int i, int j, int k) { return (k * ny + j) * nx + i; };
  std::vector<uint8_t> inside(static_cast<size_t>(nx) * ny * nz, 0);
  int64_t inside_count = 0;
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        Vec3 center = box.b_min + cell_size * Vec3(i + 0.5, j + 0.5, k + 0.5);
        int hits = bvh.count_hits(center, parity_dir, 1e-12);
        if (hits % 2 == 1) {
          inside[voxel_id(i, j, k)] = 1;
          ++inside_count;
        }
      }
    }
  }
  require(inside_count > 0, ErrorKind::Validation, kModule,
          "cell_size too coarse: no voxel centers fall inside the surface");

  // Largest 6-connected component.
  std::vector<int32_t> component(inside.size(), -1);
  int best_component = -1;
  int64_t best_size = 0;
  int32_t next_component = 0;
  std::deque<std::array<int, 3>> queue;
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        int id = voxel_id(i, j, k);
        if (!inside[id] || component[id] != -1) continue;
        int64_t size = 0;
        component[id] = next_component;
        queue.push_back({i, j, k});
        while (!queue.empty()) {
          auto [ci, cj, ck] = queue.front();
          queue.pop_front();
          ++size;
          const int steps[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0},
                                   {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
          for (const auto& s : steps) {
            int ni = ci + s[0], nj = cj + s[1], nk = ck + s[2];
            if (ni < 0 || nj < 0 || nk < 0 || ni >= nx || nj >= ny || nk >= nz) continue;
            int nid = voxel_id(ni, nj, nk);
            if (inside[nid] && component[nid] == -1) {
              component[nid] = next_component;
              queue.push_back({ni, nj, nk});
            }
          }
        }
        if (size > best_size) {
          best_size = size;
          best_component = next_component;
        }
        ++next_component;
      }
    }
  }
  if (next_component > 1) {
    log_warn("tetrahedralize: ", next_component, " voxel components; keeping largest (",
             best_size, " of ", inside_count, " voxels)");
  }

  TetMesh out;
  std::unordered_map<uint64_t, int> vertex_ids;
  vertex_ids.reserve(best_size * 2);
  auto grid_vertex = [&](int i, int j, int k) {
    uint64_t key = pack_ijk(i, j, k);
    auto it = vertex_ids.find(key);
    if (it != vertex_ids.end()) return it->second;
    int id = static_cast<int>(out.vertices.size());
    out.vertices.push_back(box.b_min + cell_size * Vec3(i, j, k));
    vertex_ids.emplace(key, id);
    return id;
  };

  out.tets.reserve(best_size * 6);
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        int id = voxel_id(i, j, k);
        if (!inside[id] || component[id] != best_component) continue;
        for (const auto& perm : kAxisPerms) {
          int d1[3] = {0, 0, 0};
          d1[perm[0]] = 1;
          int d2[3] = {d1[0], d1[1], d1[2]};
          d2[perm[1]] = 1;
          Eigen::Vector4i tet(grid_vertex(i, j, k),
                              grid_vertex(i + d1[0], j + d1[1], k + d1[2]),
                              grid_vertex(i + d2[0], j + d2[1], k + d2[2]),
                              grid_vertex(i + 1, j + 1, k + 1));
          double vol = tet_volume(out.vertices[tet[0]], out.vertices[tet[1]],
                                  out.vertices[tet[2]], out.vertices[tet[3]]);
          if (vol < 0.0) std::swap(tet[2], tet[3]);
          out.tets.push_back(tet);
        }
      }
    }
  }

  extract_boundary_surface(out);
  return out;
}

void extract_boundary_surface(TetMesh& mesh) {
  mesh.surface = SurfaceMesh{};
  mesh.surface_to_volume.clear();

  // Boundary faces appear in exactly one tet.
  std::unordered_map<uint64_t, std::pair<Vec3i, int>> face_use;  // key -> (winding, count)
  face_use.reserve(mesh.tets.size() * 4);
  for (const auto& t : mesh.tets) {
    // Outward windings of a positively oriented tet.
    const int faces[4][3] = {
        {t[1], t[2], t[3]},  // opposite t[0]
        {t[0], t[3], t[2]},  // opposite t[1]
        {t[0], t[1], t[3]},  // opposite t[2]
        {t[0], t[2], t[1]},  // opposite t[3]
    };
    for (const auto& f : faces) {
      uint64_t key = pack_face(f[0], f[1], f[2]);
      auto it = face_use.find(key);
      if (it == face_use.end()) {
        face_use.emplace(key, std::make_pair(Vec3i(f[0], f[1], f[2]), 1));
      } else {
        it->second.second++;
      }
    }
  }

  std::vector<int> volume_to_surface(mesh.vertices.size(), -1);
  for (const auto& [key, entry] : face_use) {
    if (entry.second != 1) continue;
    const Vec3i& f = entry.first;
    Vec3i mapped;
    for (int k = 0; k < 3; ++k) {
      int v = f[k];
      if (volume_to_surface[v] == -1) {
        volume_to_surface[v] = static_cast<int>(mesh.surface.vertices.size());
        mesh.surface.vertices.push_back(mesh.vertices[v]);
        mesh.surface_to_volume.push_back(v);
      }
      mapped[k] = volume_to_surface[v];
    }
    mesh.surface.triangles.push_back(mapped);
  }
  compute_vertex_normals(mesh.surface);

  require(is_watertight(mesh.surface), ErrorKind::Numerical, kModule,
          "boundary extraction produced an open surface");
}

}  // namespace objf
