#include "objf/tactile/deform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "objf/common/error.hpp"

namespace objf {

namespace {

// Pad coordinate frame: z points out of the surface along the contact
// normal, x/y span the pad plane, origin sits at the pad center which is
// the contact point pushed depth meters into the surface.
struct PadFrame {
  Vec3 origin;
  Vec3 x, y, z;
};

PadFrame make_pad_frame(const ContactSpec& spec, double roll) {
  PadFrame f;
  f.z = spec.normal();
  const Vec3 ref = std::abs(f.z.z()) > 0.9 ? Vec3::UnitX() : Vec3::UnitZ();
  f.x = ref.cross(f.z).normalized();
  f.y = f.z.cross(f.x);
  if (roll != 0.0) {
    const double c = std::cos(roll);
    const double s = std::sin(roll);
    const Vec3 rolled_x = c * f.x + s * f.y;
    const Vec3 rolled_y = c * f.y - s * f.x;
    f.x = rolled_x;
    f.y = rolled_y;
  }
  f.origin = spec.location - spec.depth * f.z;
  return f;
}

void validate_spec(const ContactSpec& spec) {
  if (!spec.location.allFinite() || !std::isfinite(spec.theta) || !std::isfinite(spec.phi)) {
    throw Error(ErrorKind::Validation, "tactile", "contact placement must be finite");
  }
  if (!(spec.depth >= kMinPressDepth && spec.depth <= kMaxPressDepth)) {
    throw Error(ErrorKind::Validation, "tactile",
                "pressing depth " + std::to_string(spec.depth) + " m is outside the supported range [" +
                    std::to_string(kMinPressDepth) + ", " + std::to_string(kMaxPressDepth) + "]");
  }
  if (spec.map_size < 2) {
    throw Error(ErrorKind::Validation, "tactile", "deformation map needs at least 2 pixels per side");
  }
  if (!(spec.pixel_pitch > 0.0) || !std::isfinite(spec.pixel_pitch)) {
    throw Error(ErrorKind::Validation, "tactile", "pixel pitch must be positive");
  }
}

Vec3 face_normal(const SurfaceMesh& mesh, int triangle) {
  const Vec3i tri = mesh.triangles[triangle];
  const Vec3& a = mesh.vertices[tri[0]];
  const Vec3& b = mesh.vertices[tri[1]];
  const Vec3& c = mesh.vertices[tri[2]];
  return (b - a).cross(c - a).normalized();
}

Eigen::MatrixXd gaussian_blur(const Eigen::MatrixXd& in, double sigma) {
  if (sigma <= 0.0) return in;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += kernel[i + radius];
  }
  for (double& k : kernel) k /= sum;

  const int rows = static_cast<int>(in.rows());
  const int cols = static_cast<int>(in.cols());
  Eigen::MatrixXd horizontal(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int cc = std::clamp(c + i, 0, cols - 1);
        acc += kernel[i + radius] * in(r, cc);
      }
      horizontal(r, c) = acc;
    }
  }
  Eigen::MatrixXd out(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int rr = std::clamp(r + i, 0, rows - 1);
        acc += kernel[i + radius] * horizontal(rr, c);
      }
      out(r, c) = acc;
    }
  }
  return out;
}

}  // namespace

DeformationMap render_deformation_map(const Bvh& bvh, const ContactSpec& spec, double roll) {
  validate_spec(spec);

  const ClosestPoint near = bvh.closest_point(spec.location);
  if (near.triangle < 0 || near.distance > kContactSnapDistance) {
    throw Error(ErrorKind::Validation, "tactile",
                "contact location is " + std::to_string(near.distance) +
                    " m from the surface, farther than the " + std::to_string(kContactSnapDistance) +
                    " m snap distance");
  }
  const Vec3 surface_normal = face_normal(bvh.mesh(), near.triangle);
  const double cos_tilt = std::clamp(surface_normal.dot(spec.normal()), -1.0, 1.0);
  const double tilt_deg = std::acos(cos_tilt) * 180.0 / std::numbers::pi;
  if (tilt_deg > kMaxContactAngleDeg + 1e-9) {
    throw Error(ErrorKind::Validation, "tactile",
                "contact normal tilts " + std::to_string(tilt_deg) + " degrees off the surface, beyond the " +
                    std::to_string(kMaxContactAngleDeg) + " degree cone");
  }

  const PadFrame frame = make_pad_frame(spec, roll);
  const int n = spec.map_size;
  DeformationMap map;
  map.heights = Eigen::MatrixXd::Zero(n, n);
  map.mask.setConstant(n, n, false);
  map.depth = spec.depth;
  map.pixel_pitch = spec.pixel_pitch;

  // Rays start on a plane that clears the whole object and travel back
  // toward the pad; anything at or below the pad plane is ignored via t_max.
  const double altitude = bvh.bounds().diagonal() + spec.depth + 2.0 * kContactSnapDistance;
  const Vec3 dir = -frame.z;
  const double half = n / 2.0;
  for (int r = 0; r < n; ++r) {
    const double v = (r + 0.5 - half) * spec.pixel_pitch;
    for (int c = 0; c < n; ++c) {
      const double u = (c + 0.5 - half) * spec.pixel_pitch;
      const Vec3 start = frame.origin + u * frame.x + v * frame.y + altitude * frame.z;
      const auto hit = bvh.raycast(start, dir, 1e-9, altitude);
      if (!hit) continue;
      const double height = std::clamp((hit->point - frame.origin).dot(frame.z), 0.0, spec.depth);
      map.heights(r, c) = height;
      map.mask(r, c) = height > 0.0;
    }
  }
  return map;
}

DeformationMap render_deformation_map(const SurfaceMesh& mesh, const ContactSpec& spec, double roll) {
  const Bvh bvh(mesh);
  return render_deformation_map(bvh, spec, roll);
}

ImageRgb shade_tactile(const DeformationMap& map, const TactileOptics& optics) {
  const int rows = static_cast<int>(map.heights.rows());
  const int cols = static_cast<int>(map.heights.cols());
  if (rows < 2 || cols < 2) {
    throw Error(ErrorKind::Validation, "tactile", "deformation map needs at least 2 pixels per side");
  }
  if (!(map.pixel_pitch > 0.0)) {
    throw Error(ErrorKind::Validation, "tactile", "deformation map is missing its pixel pitch");
  }
  if (!map.heights.allFinite()) {
    throw Error(ErrorKind::Validation, "tactile", "deformation heights must be finite");
  }

  const Eigen::MatrixXd smooth = gaussian_blur(map.heights, optics.blur_sigma);

  const double elevation = optics.elevation_deg * std::numbers::pi / 180.0;
  Vec3 lights[3];
  for (int ch = 0; ch < 3; ++ch) {
    const double az = ch * 2.0 * std::numbers::pi / 3.0;
    lights[ch] = {std::cos(az) * std::cos(elevation), std::sin(az) * std::cos(elevation),
                  std::sin(elevation)};
  }

  ImageRgb img = ImageRgb::create(cols, rows);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int c0 = std::max(c - 1, 0);
      const int c1 = std::min(c + 1, cols - 1);
      const int r0 = std::max(r - 1, 0);
      const int r1 = std::min(r + 1, rows - 1);
      const double sx = (smooth(r, c1) - smooth(r, c0)) / ((c1 - c0) * map.pixel_pitch);
      const double sy = (smooth(r1, c) - smooth(r0, c)) / ((r1 - r0) * map.pixel_pitch);
      const Vec3 normal = Vec3(-sx, -sy, 1.0).normalized();
      for (int ch = 0; ch < 3; ++ch) {
        const double lambert = std::max(0.0, normal.dot(lights[ch]));
        const double intensity = optics.ambient + optics.diffuse * lambert;
        img.at(c, r, ch) = static_cast<float>(std::clamp(intensity, 0.0, 1.0));
      }
    }
  }
  return img;
}

void save_deformation_png(const std::string& path, const DeformationMap& map) {
  save_png_gray16(path, map.heights, kMaxPressDepth);
}

Eigen::MatrixXd load_deformation_png(const std::string& path) {
  return load_png_gray16(path, kMaxPressDepth);
}

}  // namespace objf
