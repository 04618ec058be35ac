#pragma once

#include <string>

#include "objf/geometry/voxelize.hpp"

namespace objf {

// Plain-text tet format: an optional "tet" header line, then one
// "v <x> <y> <z>" line per vertex and one "t <i> <j> <k> <l>" line per tet
// (0-based indices). The boundary surface is re-extracted on load.
TetMesh load_tet(const std::string& path);
void save_tet(const TetMesh& mesh, const std::string& path);

}  // namespace objf
