#include "objf/geometry/tet_io.hpp"

#include <fstream>
#include <sstream>

#include "objf/common/error.hpp"

namespace objf {

namespace {
constexpr const char* kModule = "geometry";
}

TetMesh load_tet(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::Io, kModule, "cannot open tet file: " + path);

  TetMesh mesh;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag.empty() || tag[0] == '#') continue;
    if (tag == "tet") continue;  // header line
    if (tag == "v") {
      Vec3 p;
      if (!(ls >> p[0] >> p[1] >> p[2])) {
        raise(ErrorKind::Parse, kModule, "malformed vertex at line " + std::to_string(line_no));
      }
      mesh.vertices.push_back(p);
    } else if (tag == "t") {
      Eigen::Vector4i t;
      if (!(ls >> t[0] >> t[1] >> t[2] >> t[3])) {
        raise(ErrorKind::Parse, kModule, "malformed tet at line " + std::to_string(line_no));
      }
      const int n = static_cast<int>(mesh.vertices.size());
      for (int k = 0; k < 4; ++k) {
        if (t[k] < 0 || t[k] >= n) {
          raise(ErrorKind::Validation, kModule,
                "tet at line " + std::to_string(line_no) + " references vertex " +
                    std::to_string(t[k]) + " of " + std::to_string(n));
        }
      }
      double vol = tet_volume(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]],
                              mesh.vertices[t[3]]);
      if (vol < 0.0) std::swap(t[2], t[3]);
      if (std::abs(vol) < 1e-15) {
        raise(ErrorKind::Validation, kModule,
              "degenerate tet at line " + std::to_string(line_no));
      }
      mesh.tets.push_back(t);
    } else {
      raise(ErrorKind::Parse, kModule,
            "unknown record '" + tag + "' at line " + std::to_string(line_no));
    }
  }
  require(!mesh.vertices.empty() && !mesh.tets.empty(), ErrorKind::Validation, kModule,
          "empty tet mesh in " + path);
  extract_boundary_surface(mesh);
  return mesh;
}

void save_tet(const TetMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), ErrorKind::Io, kModule, "cannot write tet file: " + path);
  out << "tet\n";
  out.precision(12);
  for (const auto& v : mesh.vertices) {
    out << "v " << v[0] << " " << v[1] << " " << v[2] << "\n";
  }
  for (const auto& t : mesh.tets) {
    out << "t " << t[0] << " " << t[1] << " " << t[2] << " " << t[3] << "\n";
  }
  require(out.good(), ErrorKind::Io, kModule, "write failed: " + path);
}

}  // namespace objf
