#include "objf/tactile/deform.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "objf/common/error.hpp"
#include "objf/geometry/shapes.hpp"
#include "test_util.hpp"

using namespace objf;

namespace {

ContactSpec top_of_sphere(double depth, int map_size = 64) {
  ContactSpec spec;
  spec.location = {0.0, 0.0, 0.005};
  spec.theta = 0.0;
  spec.phi = 0.0;
  spec.depth = depth;
  spec.map_size = map_size;
  return spec;
}

// Largest pixel-center distance from the pad center over touching pixels.
double footprint_radius_px(const DeformationMap& map) {
  const double half = map.heights.rows() / 2.0;
  double radius = 0.0;
  for (int r = 0; r < map.heights.rows(); ++r) {
    for (int c = 0; c < map.heights.cols(); ++c) {
      if (!map.mask(r, c)) continue;
      radius = std::max(radius, std::hypot(c + 0.5 - half, r + 0.5 - half));
    }
  }
  return radius;
}

}  // namespace

TEST_CASE("flat face presses to a uniform depth") {
  const SurfaceMesh box = make_box({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0});
  ContactSpec spec;
  spec.location = {0.0, 0.0, 0.5};
  spec.depth = 0.001;
  const DeformationMap map = render_deformation_map(box, spec);

  REQUIRE(map.heights.rows() == 64);
  REQUIRE(map.heights.cols() == 64);
  CHECK(map.heights.minCoeff() >= spec.depth - 1e-9);
  CHECK(map.heights.maxCoeff() <= spec.depth);
  CHECK(map.mask.all());
  CHECK(map.depth == spec.depth);
  CHECK(map.pixel_pitch == spec.pixel_pitch);
}

TEST_CASE("spherical cap footprint matches the contact geometry") {
  const SurfaceMesh sphere = make_icosphere({0.0, 0.0, 0.0}, 0.005, 4);
  const Bvh bvh(sphere);
  const ContactSpec spec = top_of_sphere(0.001);
  const DeformationMap map = render_deformation_map(bvh, spec);

  // A 1 mm press into a 5 mm ball touches a disk of radius
  // sqrt(2 R p - p^2) = 3 mm, which is 12 pixels at 0.25 mm per pixel.
  CHECK(std::abs(footprint_radius_px(map) - 12.0) <= 2.0);

  CHECK(map.heights.maxCoeff() <= spec.depth + 1e-9);
  CHECK(map.heights.minCoeff() >= 0.0);
  for (int r = 0; r < map.heights.rows(); ++r) {
    for (int c = 0; c < map.heights.cols(); ++c) {
      CHECK(map.mask(r, c) == (map.heights(r, c) > 0.0));
    }
  }
  // The deepest pixel sits at the pad center and reaches nearly the full
  // pressing depth (the pole of the ball).
  const int half = 32;
  CHECK(map.heights.block(half - 1, half - 1, 2, 2).maxCoeff() ==
        doctest::Approx(spec.depth).epsilon(0.01));
}

TEST_CASE("deeper presses grow the footprint and never lower a pixel") {
  const SurfaceMesh sphere = make_icosphere({0.0, 0.0, 0.0}, 0.005, 4);
  const Bvh bvh(sphere);
  const DeformationMap shallow = render_deformation_map(bvh, top_of_sphere(0.0005));
  const DeformationMap medium = render_deformation_map(bvh, top_of_sphere(0.001));
  const DeformationMap deep = render_deformation_map(bvh, top_of_sphere(0.002));

  const auto touching = [](const DeformationMap& m) { return m.mask.count(); };
  CHECK(touching(shallow) < touching(medium));
  CHECK(touching(medium) < touching(deep));

  CHECK(((medium.heights - shallow.heights).minCoeff() >= -1e-12));
  CHECK(((deep.heights - medium.heights).minCoeff() >= -1e-12));
}

TEST_CASE("tilted contacts render but only within the cone") {
  const SurfaceMesh sphere = make_icosphere({0.0, 0.0, 0.0}, 0.005, 4);
  const Bvh bvh(sphere);

  ContactSpec tilted = top_of_sphere(0.001);
  tilted.theta = 10.0 * std::numbers::pi / 180.0;
  tilted.phi = 0.3;
  const DeformationMap map = render_deformation_map(bvh, tilted);
  CHECK(map.heights.maxCoeff() <= tilted.depth + 1e-9);
  CHECK(map.mask.count() > 0);

  ContactSpec beyond = top_of_sphere(0.001);
  beyond.theta = 20.0 * std::numbers::pi / 180.0;
  CHECK_THROWS_WITH_AS(render_deformation_map(bvh, beyond), doctest::Contains("cone"), Error);
}

TEST_CASE("contact requests are validated") {
  const SurfaceMesh sphere = make_icosphere({0.0, 0.0, 0.0}, 0.005, 4);
  const Bvh bvh(sphere);

  ContactSpec floating = top_of_sphere(0.001);
  floating.location = {0.0, 0.0, 0.008};
  CHECK_THROWS_WITH_AS(render_deformation_map(bvh, floating), doctest::Contains("surface"), Error);

  ContactSpec shallow = top_of_sphere(0.0004);
  CHECK_THROWS_WITH_AS(render_deformation_map(bvh, shallow), doctest::Contains("depth"), Error);
  ContactSpec deep = top_of_sphere(0.0025);
  CHECK_THROWS_WITH_AS(render_deformation_map(bvh, deep), doctest::Contains("depth"), Error);

  ContactSpec tiny = top_of_sphere(0.001);
  tiny.map_size = 1;
  CHECK_THROWS_AS(render_deformation_map(bvh, tiny), Error);

  ContactSpec bad_pitch = top_of_sphere(0.001);
  bad_pitch.pixel_pitch = 0.0;
  CHECK_THROWS_AS(render_deformation_map(bvh, bad_pitch), Error);
}

TEST_CASE("rolling the pad a quarter turn permutes the pixels") {
  // Off-center contact near a box edge so the window content is asymmetric.
  const SurfaceMesh box = make_box({0.0, 0.0, 0.0}, {0.02, 0.03, 0.01});
  const Bvh bvh(box);
  ContactSpec spec;
  spec.location = {0.004, -0.006, 0.005};
  spec.depth = 0.001;

  const DeformationMap base = render_deformation_map(bvh, spec, 0.0);
  const DeformationMap rolled = render_deformation_map(bvh, spec, std::numbers::pi / 2.0);

  const int n = spec.map_size;
  REQUIRE(base.mask.count() > 0);
  REQUIRE(base.mask.count() < static_cast<Eigen::Index>(n) * n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      CHECK(rolled.heights(r, c) == doctest::Approx(base.heights(c, n - 1 - r)).epsilon(1e-9));
      CHECK(rolled.mask(r, c) == base.mask(c, n - 1 - r));
    }
  }
}

TEST_CASE("flat maps shade to a uniform gray") {
  DeformationMap map;
  map.heights = Eigen::MatrixXd::Constant(16, 16, 0.0007);
  map.mask.setConstant(16, 16, true);
  map.depth = 0.001;
  map.pixel_pitch = 0.00025;

  const ImageRgb img = shade_tactile(map);
  // No slope anywhere: every light grazes the same flat normal, so each
  // channel is ambient plus diffuse times sin(60 deg).
  const float expected = static_cast<float>(0.35 + 0.65 * std::sin(60.0 * std::numbers::pi / 180.0));
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int ch = 0; ch < 3; ++ch) {
        CHECK(img.at(x, y, ch) == doctest::Approx(expected).epsilon(1e-6));
        CHECK(img.at(x, y, ch) == img.at(0, 0, ch));
      }
    }
  }
  CHECK(std::lround(expected * 255.0f) == 233);
}

TEST_CASE("shading lobes point along the light directions") {
  const int n = 64;
  DeformationMap map;
  map.heights = Eigen::MatrixXd::Zero(n, n);
  map.mask.setConstant(n, n, false);
  map.depth = 0.001;
  map.pixel_pitch = 0.00025;
  // Round dome in the middle of the pad.
  const double dome_px = 18.0;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double d2 = (std::pow(c + 0.5 - n / 2.0, 2) + std::pow(r + 0.5 - n / 2.0, 2)) /
                        (dome_px * dome_px);
      if (d2 < 1.0) {
        map.heights(r, c) = 0.0008 * (1.0 - d2);
        map.mask(r, c) = true;
      }
    }
  }

  const ImageRgb img = shade_tactile(map);
  for (int ch = 0; ch < 3; ++ch) {
    float best = -1.0f;
    int best_r = 0, best_c = 0;
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        if (img.at(c, r, ch) > best) {
          best = img.at(c, r, ch);
          best_r = r;
          best_c = c;
        }
      }
    }
    const double az = ch * 2.0 * std::numbers::pi / 3.0;
    const Eigen::Vector2d to_best(best_c + 0.5 - n / 2.0, best_r + 0.5 - n / 2.0);
    REQUIRE(to_best.norm() > 1.0);
    const Eigen::Vector2d light_dir(std::cos(az), std::sin(az));
    CHECK(to_best.normalized().dot(light_dir) > 0.7);
  }
}

TEST_CASE("smooth dimples shade to the closed form") {
  // A paraboloid is preserved by symmetric blurring up to a constant
  // offset, so away from the border the lit image must match an analytic
  // evaluation of the same lighting model.
  const int n = 48;
  const double pitch = 0.00025;
  const double curvature_radius = 0.05;
  DeformationMap map;
  map.heights.resize(n, n);
  map.mask.setConstant(n, n, true);
  map.depth = 0.001;
  map.pixel_pitch = pitch;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double u = (c + 0.5 - n / 2.0) * pitch;
      const double v = (r + 0.5 - n / 2.0) * pitch;
      map.heights(r, c) = 0.001 - (u * u + v * v) / (2.0 * curvature_radius);
    }
  }

  const TactileOptics optics;
  const ImageRgb img = shade_tactile(map, optics);

  const double elevation = optics.elevation_deg * std::numbers::pi / 180.0;
  const int margin = static_cast<int>(std::ceil(3.0 * optics.blur_sigma)) + 1;
  double max_err = 0.0;
  for (int r = margin; r < n - margin; ++r) {
    for (int c = margin; c < n - margin; ++c) {
      const double u = (c + 0.5 - n / 2.0) * pitch;
      const double v = (r + 0.5 - n / 2.0) * pitch;
      const Vec3 normal = Vec3(u / curvature_radius, v / curvature_radius, 1.0).normalized();
      for (int ch = 0; ch < 3; ++ch) {
        const double az = ch * 2.0 * std::numbers::pi / 3.0;
        const Vec3 light(std::cos(az) * std::cos(elevation), std::sin(az) * std::cos(elevation),
                         std::sin(elevation));
        const double expected =
            std::clamp(optics.ambient + optics.diffuse * std::max(0.0, normal.dot(light)), 0.0, 1.0);
        max_err = std::max(max_err, std::abs(expected - img.at(c, r, ch)));
      }
    }
  }
  CHECK(max_err <= 2.0 / 255.0);
}

TEST_CASE("shading validates its input") {
  DeformationMap map;
  map.heights = Eigen::MatrixXd::Zero(1, 1);
  map.mask.setConstant(1, 1, false);
  map.pixel_pitch = 0.00025;
  CHECK_THROWS_AS(shade_tactile(map), Error);

  map.heights = Eigen::MatrixXd::Zero(4, 4);
  map.mask.setConstant(4, 4, false);
  map.pixel_pitch = 0.0;
  CHECK_THROWS_AS(shade_tactile(map), Error);

  map.pixel_pitch = 0.00025;
  map.heights(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(shade_tactile(map), Error);
}

TEST_CASE("height maps survive the png roundtrip") {
  const SurfaceMesh sphere = make_icosphere({0.0, 0.0, 0.0}, 0.005, 4);
  const DeformationMap map = render_deformation_map(sphere, top_of_sphere(0.001));

  testutil::TempDir dir("tactile");
  const std::string path = dir.file("press.png");
  save_deformation_png(path, map);
  const Eigen::MatrixXd back = load_deformation_png(path);

  REQUIRE(back.rows() == map.heights.rows());
  const double step = kMaxPressDepth / 65535.0;
  CHECK((back - map.heights).cwiseAbs().maxCoeff() <= 0.5 * step + 1e-12);
}
