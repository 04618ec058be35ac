#pragma once

#include <Eigen/Core>
#include <cmath>
#include <string>

#include "objf/geometry/bvh.hpp"
#include "objf/image/image.hpp"

namespace objf {

// Allowed pressing depth of the gel pad, and how far a contact may sit from
// the surface or tilt away from its normal before the request is rejected.
constexpr double kMinPressDepth = 0.0005;
constexpr double kMaxPressDepth = 0.002;
constexpr double kMaxContactAngleDeg = 15.0;
constexpr double kContactSnapDistance = 0.001;

// One placement of the sensor pad: where it touches, which way it presses
// (spherical angles of the pad normal, pointing out of the surface), how
// deep, and the sampling grid of the pad.
struct ContactSpec {
  Eigen::Vector3d location = Eigen::Vector3d::Zero();
  double theta = 0.0;  // polar angle of the pad normal, radians from +z
  double phi = 0.0;    // azimuth of the pad normal, radians
  double depth = 0.001;
  int map_size = 64;
  double pixel_pitch = 0.00025;

  Eigen::Vector3d normal() const {
    const double s = std::sin(theta);
    return {s * std::cos(phi), s * std::sin(phi), std::cos(theta)};
  }
};

struct DeformationMap {
  Eigen::MatrixXd heights;  // indentation in meters, row-major pad pixels
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> mask;
  double depth = 0.0;
  double pixel_pitch = 0.0;
};

// Presses a flat pad of map_size x map_size pixels against the mesh along
// the contact normal and records how far the surface pokes into the gel at
// each pixel. The pad plane sits depth meters below the contact point; roll
// spins the pad about its normal. Rejects contacts that float away from the
// surface or tilt more than the cone limit off the local face normal.
DeformationMap render_deformation_map(const Bvh& bvh, const ContactSpec& spec, double roll = 0.0);
DeformationMap render_deformation_map(const SurfaceMesh& mesh, const ContactSpec& spec,
                                      double roll = 0.0);

struct TactileOptics {
  double blur_sigma = 2.0;  // pixels of Gaussian smoothing before shading
  double ambient = 0.35;
  double diffuse = 0.65;
  double elevation_deg = 60.0;  // light elevation above the pad plane
};

// Renders the indentation field the way an illuminated gel camera sees it:
// smooth the heights, recover surface normals, and light them with red,
// green, and blue lamps spaced 120 degrees apart in azimuth.
ImageRgb shade_tactile(const DeformationMap& map, const TactileOptics& optics = {});

// Height maps travel as 16-bit grayscale PNG quantized over the full press
// range [0, kMaxPressDepth].
void save_deformation_png(const std::string& path, const DeformationMap& map);
Eigen::MatrixXd load_deformation_png(const std::string& path);

}  // namespace objf
