#include "objf/geometry/obj_io.hpp"

#include <fstream>
#include <sstream>

#include "objf/common/error.hpp"
#include "objf/common/log.hpp"

namespace objf {

namespace {

constexpr const char* kModule = "geometry";

// Parses "3", "3//7", or "3/2/7" into (vertex, normal) 1-based indices;
// normal index 0 means absent.
void parse_face_ref(const std::string& token, long& v, long& n, size_t line_no) {
  v = 0;
  n = 0;
  size_t s1 = token.find('/');
  try {
    if (s1 == std::string::npos) {
      v = std::stol(token);
      return;
    }
    v = std::stol(token.substr(0, s1));
    size_t s2 = token.find('/', s1 + 1);
    if (s2 == std::string::npos) return;  // v/vt with no normal
    std::string third = token.substr(s2 + 1);
    if (!third.empty()) n = std::stol(third);
  } catch (const std::exception&) {
    raise(ErrorKind::Parse, kModule,
          "malformed face reference '" + token + "' at line " + std::to_string(line_no));
  }
}

}  // namespace

SurfaceMesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::Io, kModule, "cannot open mesh file: " + path);

  SurfaceMesh mesh;
  std::vector<Vec3> file_normals;
  // Normal index per vertex as given by f records; -1 = unseen.
  std::vector<long> vertex_normal_ref;
  bool normals_consistent = true;

  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag.empty() || tag[0] == '#') continue;

    if (tag == "v") {
      Vec3 p;
      if (!(ls >> p[0] >> p[1] >> p[2])) {
        raise(ErrorKind::Parse, kModule, "malformed vertex at line " + std::to_string(line_no));
      }
      mesh.vertices.push_back(p);
    } else if (tag == "vn") {
      Vec3 n;
      if (!(ls >> n[0] >> n[1] >> n[2])) {
        raise(ErrorKind::Parse, kModule, "malformed normal at line " + std::to_string(line_no));
      }
      file_normals.push_back(n);
    } else if (tag == "f") {
      std::vector<long> vs, ns;
      std::string token;
      while (ls >> token) {
        long v, n;
        parse_face_ref(token, v, n, line_no);
        vs.push_back(v);
        ns.push_back(n);
      }
      if (vs.size() < 3) {
        raise(ErrorKind::Parse, kModule,
              "face with fewer than 3 vertices at line " + std::to_string(line_no));
      }
      vertex_normal_ref.resize(std::max(vertex_normal_ref.size(), mesh.vertices.size()), -1);
      for (size_t k = 0; k < vs.size(); ++k) {
        long v = vs[k];
        if (v < 1 || static_cast<size_t>(v) > mesh.vertices.size()) {
          raise(ErrorKind::Validation, kModule,
                "face at line " + std::to_string(line_no) + " references vertex " +
                    std::to_string(v) + " of " + std::to_string(mesh.vertices.size()));
        }
        if (ns[k] > 0) {
          long prev = vertex_normal_ref[v - 1];
          if (prev != -1 && prev != ns[k]) normals_consistent = false;
          vertex_normal_ref[v - 1] = ns[k];
        }
      }
      for (size_t k = 2; k < vs.size(); ++k) {
        mesh.triangles.emplace_back(static_cast<int>(vs[0] - 1), static_cast<int>(vs[k - 1] - 1),
                                    static_cast<int>(vs[k] - 1));
      }
    }
  }

  require(!mesh.vertices.empty(), ErrorKind::Validation, kModule, "empty mesh: no vertices in " + path);
  require(!mesh.triangles.empty(), ErrorKind::Validation, kModule, "empty mesh: no faces in " + path);

  // Adopt the file's normals only when every vertex got a consistent one;
  // otherwise recompute from geometry.
  bool full = normals_consistent && vertex_normal_ref.size() == mesh.vertices.size();
  if (full) {
    for (long ref : vertex_normal_ref) {
      if (ref < 1 || static_cast<size_t>(ref) > file_normals.size()) {
        full = false;
        break;
      }
    }
  }
  if (full) {
    mesh.normals.resize(mesh.vertices.size());
    for (size_t i = 0; i < mesh.vertices.size(); ++i) {
      Vec3 n = file_normals[vertex_normal_ref[i] - 1];
      double len = n.norm();
      require(len > 1e-12, ErrorKind::Validation, kModule,
              "zero-length normal for vertex " + std::to_string(i));
      mesh.normals[i] = n / len;
    }
  } else {
    if (!file_normals.empty()) {
      log_debug("obj normals in ", path, " are not one-per-vertex; recomputing");
    }
    compute_vertex_normals(mesh);
  }

  validate_mesh(mesh);
  return mesh;
}

void save_mesh(const SurfaceMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), ErrorKind::Io, kModule, "cannot write mesh file: " + path);
  out.precision(12);
  for (const auto& v : mesh.vertices) {
    out << "v " << v[0] << " " << v[1] << " " << v[2] << "\n";
  }
  bool has_normals = mesh.normals.size() == mesh.vertices.size();
  if (has_normals) {
    for (const auto& n : mesh.normals) {
      out << "vn " << n[0] << " " << n[1] << " " << n[2] << "\n";
    }
  }
  for (const auto& t : mesh.triangles) {
    if (has_normals) {
      out << "f " << t[0] + 1 << "//" << t[0] + 1 << " " << t[1] + 1 << "//" << t[1] + 1 << " "
          << t[2] + 1 << "//" << t[2] + 1 << "\n";
    } else {
      out << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
    }
  }
  require(out.good(), ErrorKind::Io, kModule, "write failed: " + path);
}

}  // namespace objf
