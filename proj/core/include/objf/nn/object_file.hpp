#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "objf/geometry/mesh.hpp"
#include "objf/nn/mlp.hpp"

namespace objf {

// Scene-cell grid of tiny networks plus an occupancy bitmask. Cells whose
// occupancy bit is clear hold canonical all-zero networks so they can still
// be queried.
struct VisionNetData {
  int grid_resolution = 16;
  int encoding_frequencies = 6;  // positional encoding L for cell-local coords
  std::vector<Mlp> cells;        // resolution^3, x-fastest row-major
  std::vector<uint8_t> occupancy_bits;

  bool cell_occupied(size_t index) const {
    return (occupancy_bits[index >> 3] >> (index & 7)) & 1;
  }
  void set_cell_occupied(size_t index, bool value) {
    if (value)
      occupancy_bits[index >> 3] |= static_cast<uint8_t>(1u << (index & 7));
    else
      occupancy_bits[index >> 3] &= static_cast<uint8_t>(~(1u << (index & 7)));
  }
};

// Per-axis gain predictors plus the analytic mode constants they decorate.
struct AudioNetData {
  Mlp branch_x, branch_y, branch_z;
  Eigen::VectorXd omega_hz;
  Eigen::VectorXd damping;
  Eigen::VectorXd gain_mean;   // per-mode standardization applied during training
  Eigen::VectorXd gain_scale;
  std::vector<Eigen::Vector3f> vertices;  // tet vertex positions the net was fit on
};

struct TouchNetData {
  Mlp net;
  double min_depth = 0.0005;  // meters
  double max_depth = 0.002;
  double max_angle_deg = 15.0;
  int map_size = 64;
  double pixel_pitch = 0.00025;  // meters per pixel
};

struct ObjectFile {
  std::string object_id;
  std::string material;
  Aabb bounds;
  std::optional<VisionNetData> vision;
  std::optional<AudioNetData> audio;
  std::optional<TouchNetData> touch;
};

void save_object_file(const std::string& path, const ObjectFile& of);
ObjectFile load_object_file(const std::string& path);

}  // namespace objf
