#include "objf/tactile/touchnet.hpp"

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "objf/common/error.hpp"
#include "objf/geometry/shapes.hpp"
#include "objf/nn/object_file.hpp"
#include "test_util.hpp"

using namespace objf;

namespace {

// Input width of the touch field network: 3 coordinates through a 7-frequency
// positional encoding with the raw input kept.
constexpr int kTouchInputDim = 45;

TouchFitConfig small_config() {
  TouchFitConfig cfg;
  cfg.num_contacts = 24;
  cfg.map_size = 32;
  cfg.coverage_contacts = 48;
  cfg.hidden = {48, 48};
  cfg.epochs = 8;
  cfg.seed = 3;
  cfg.threads = 1;
  return cfg;
}

bool specs_equal(const ContactSpec& a, const ContactSpec& b) {
  return a.location == b.location && a.theta == b.theta && a.phi == b.phi && a.depth == b.depth &&
         a.map_size == b.map_size && a.pixel_pitch == b.pixel_pitch;
}

// Field net whose output is the normalized z coordinate plus a constant:
// each hidden pair computes ReLU(a) - ReLU(-a) = a, so the zero crossing
// sits at a chosen plane and reconstruction produces a uniform height.
Mlp plane_field_net(float offset) {
  Mlp net = make_zero_mlp<float>({kTouchInputDim, 2, 1});
  net.weights[0](0, 2) = 1.0f;
  net.weights[0](1, 2) = -1.0f;
  net.biases[0][0] = offset;
  net.biases[0][1] = -offset;
  net.weights[1](0, 0) = 1.0f;
  net.weights[1](0, 1) = -1.0f;
  return net;
}

}  // namespace

TEST_CASE("contact sampling is reproducible and lands on the surface") {
  const SurfaceMesh sphere = make_icosphere({0.01, -0.02, 0.03}, 0.005, 3);
  const Bvh bvh(sphere);

  const auto first = sample_contact_specs(bvh, 40, 5);
  const auto again = sample_contact_specs(bvh, 40, 5);
  const auto other = sample_contact_specs(bvh, 40, 6);
  REQUIRE(first.size() == 40);
  bool identical = true;
  bool differs = false;
  for (size_t i = 0; i < first.size(); ++i) {
    identical = identical && specs_equal(first[i], again[i]);
    differs = differs || !specs_equal(first[i], other[i]);
  }
  CHECK(identical);
  CHECK(differs);

  const double cone = kMaxContactAngleDeg * std::numbers::pi / 180.0;
  for (const ContactSpec& spec : first) {
    const ClosestPoint near = bvh.closest_point(spec.location);
    CHECK(near.distance <= 1e-9);
    CHECK(spec.depth >= kMinPressDepth);
    CHECK(spec.depth <= kMaxPressDepth);

    const Vec3i tri = sphere.triangles[near.triangle];
    const Vec3 normal = (sphere.vertices[tri[1]] - sphere.vertices[tri[0]])
                            .cross(sphere.vertices[tri[2]] - sphere.vertices[tri[0]])
                            .normalized();
    const double tilt = std::acos(std::clamp(normal.dot(spec.normal()), -1.0, 1.0));
    CHECK(tilt <= cone + 1e-6);
  }

  // Every sampled contact renders without tripping the placement checks.
  for (size_t i = 0; i < 4; ++i) {
    CHECK_NOTHROW(render_deformation_map(bvh, first[i]));
  }
}

TEST_CASE("learned height fields reconstruct seen and unseen contacts") {
  const SurfaceMesh sphere = make_icosphere({0.0, 0.0, 0.0}, 0.005, 3);
  const TouchFitConfig cfg = small_config();
  const TouchNetModel model = fit_touchnet(sphere, cfg);

  CHECK(model.dataset_pixels == 24 * 32 * 32);
  CHECK(model.data.map_size == cfg.map_size);
  CHECK(model.data.pixel_pitch == cfg.pixel_pitch);
  CHECK(model.train_psnr >= 36.0);
  CHECK(model.held_out_psnr >= 32.0);

  // Reconstruction of a fresh contact stays inside the physical envelope.
  const Bvh bvh(sphere);
  const auto specs = sample_contact_specs(bvh, 3, 77, cfg.map_size, cfg.pixel_pitch);
  for (const ContactSpec& spec : specs) {
    const DeformationMap map = touchnet_eval(model, spec);
    CHECK(map.heights.minCoeff() >= 0.0);
    CHECK(map.heights.maxCoeff() <= spec.depth + 1e-12);
    for (int r = 0; r < map.heights.rows(); ++r) {
      for (int c = 0; c < map.heights.cols(); ++c) {
        CHECK(map.mask(r, c) == (map.heights(r, c) > 1e-5));
      }
    }
  }

  // Same seed, same fit.
  const TouchNetModel rerun = fit_touchnet(sphere, cfg);
  CHECK(rerun.train_psnr == model.train_psnr);
  CHECK(rerun.held_out_psnr == model.held_out_psnr);
}

TEST_CASE("evaluation enforces the trained sensor envelope") {
  TouchNetData data;
  data.net = make_zero_mlp<float>({kTouchInputDim, 4, 1});
  data.map_size = 32;
  Aabb bounds;
  bounds.b_min = {-0.01, -0.01, -0.01};
  bounds.b_max = {0.01, 0.01, 0.01};

  ContactSpec spec;
  spec.location = {0.0, 0.0, 0.005};
  spec.depth = 0.001;
  spec.map_size = 32;
  CHECK_NOTHROW(touchnet_eval(data, bounds, spec));

  ContactSpec too_shallow = spec;
  too_shallow.depth = 0.0004;
  CHECK_THROWS_WITH_AS(touchnet_eval(data, bounds, too_shallow), doctest::Contains("range"), Error);

  ContactSpec wrong_grid = spec;
  wrong_grid.map_size = 16;
  CHECK_THROWS_WITH_AS(touchnet_eval(data, bounds, wrong_grid), doctest::Contains("pad geometry"),
                       Error);

  ContactSpec wrong_pitch = spec;
  wrong_pitch.pixel_pitch = 0.0005;
  CHECK_THROWS_WITH_AS(touchnet_eval(data, bounds, wrong_pitch), doctest::Contains("pad geometry"),
                       Error);

  TouchNetData misshapen = data;
  misshapen.net = make_zero_mlp<float>({10, 4, 1});
  CHECK_THROWS_AS(touchnet_eval(misshapen, bounds, spec), Error);
}

TEST_CASE("reconstruction clamps to the press range and thresholds the mask") {
  // Constant fields drive the reconstruction to its extremes: a field that
  // is positive everywhere never crosses zero, so nothing touches; one that
  // is already nonpositive at the top of the search corridor reads as fully
  // pressed at every pixel.
  TouchNetData data;
  data.net = make_zero_mlp<float>({kTouchInputDim, 1, 1});
  Aabb bounds;
  bounds.b_min = {-0.01, -0.01, -0.01};
  bounds.b_max = {0.01, 0.01, 0.01};
  ContactSpec spec;
  spec.location = {0.0, 0.0, 0.005};
  spec.depth = 0.001;

  data.net.biases.back()[0] = 1.0f;  // all outside
  DeformationMap map = touchnet_eval(data, bounds, spec);
  CHECK((map.heights.array() == 0.0).all());
  CHECK(!map.mask.any());

  data.net.biases.back()[0] = -1.0f;  // all inside
  map = touchnet_eval(data, bounds, spec);
  CHECK((map.heights.array() == spec.depth).all());
  CHECK(map.mask.all());

  // A plane-field net puts the surface at an exact height along the pad
  // normal. The pad bottom sits at z = 0.004 with half span 0.01, so an
  // offset of -0.4005 crosses 5 um above the pad: real contact depth but
  // below the 10 um mask threshold.
  data.net = plane_field_net(-0.4005f);
  map = touchnet_eval(data, bounds, spec);
  CHECK(map.heights(0, 0) == doctest::Approx(5e-6).epsilon(1e-2));
  CHECK((map.heights.array() - map.heights(0, 0)).abs().maxCoeff() < 1e-9);
  CHECK(!map.mask.any());

  data.net = plane_field_net(-0.402f);  // 20 um, above the threshold
  map = touchnet_eval(data, bounds, spec);
  CHECK(map.heights(0, 0) == doctest::Approx(2e-5).epsilon(1e-2));
  CHECK(map.mask.all());
}

TEST_CASE("object files carry the touch model") {
  const SurfaceMesh sphere = make_icosphere({0.0, 0.0, 0.0}, 0.005, 3);
  TouchFitConfig cfg = small_config();
  cfg.num_contacts = 6;
  cfg.coverage_contacts = 8;
  cfg.epochs = 2;  // plumbing check, accuracy does not matter here
  const TouchNetModel model = fit_touchnet(sphere, cfg);

  ObjectFile object;
  object.object_id = "ball";
  object.material = "steel";
  object.bounds = model.bounds;
  object.touch = model.data;

  testutil::TempDir dir("touchnet");
  const std::string path = dir.file("ball.objf");
  save_object_file(path, object);
  const ObjectFile loaded = load_object_file(path);
  const TouchNetModel restored = touchnet_from_object(loaded);

  const Bvh bvh(sphere);
  const ContactSpec probe = sample_contact_specs(bvh, 1, 123, cfg.map_size, cfg.pixel_pitch)[0];
  const DeformationMap before = touchnet_eval(model, probe);
  const DeformationMap after = touchnet_eval(restored, probe);
  CHECK((before.heights.array() == after.heights.array()).all());

  ObjectFile bare;
  bare.object_id = "empty";
  bare.bounds = model.bounds;
  CHECK_THROWS_WITH_AS(touchnet_from_object(bare), doctest::Contains("touch"), Error);
}
