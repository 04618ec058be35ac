#include "objf/image/image.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "doctest.h"
#include "objf/common/error.hpp"
#include "objf/common/rng.hpp"
#include "test_util.hpp"

using namespace objf;

namespace {

ImageRgb random_image(int width, int height, uint64_t seed) {
  ImageRgb img = ImageRgb::create(width, height);
  Rng rng(seed, 0);
  for (float& p : img.pixels) p = static_cast<float>(rng.uniform());
  return img;
}

}  // namespace

TEST_CASE("8-bit png roundtrip stays within quantization error") {
  testutil::TempDir dir("image");
  const ImageRgb img = random_image(7, 5, 11);
  const std::string path = dir.file("rt.png");
  save_png_rgb8(path, img);
  const ImageRgb back = load_png_rgb8(path);

  REQUIRE(back.width == 7);
  REQUIRE(back.height == 5);
  float max_err = 0.0f;
  for (size_t i = 0; i < img.pixels.size(); ++i) {
    max_err = std::max(max_err, std::abs(img.pixels[i] - back.pixels[i]));
  }
  CHECK(max_err <= 0.5f / 255.0f + 1e-6f);
}

TEST_CASE("8-bit png clamps out-of-range values") {
  testutil::TempDir dir("image");
  ImageRgb img = ImageRgb::create(2, 1);
  img.at(0, 0, 0) = -0.5f;
  img.at(0, 0, 1) = 1.7f;
  img.at(0, 0, 2) = 0.25f;
  const std::string path = dir.file("clamp.png");
  save_png_rgb8(path, img);
  const ImageRgb back = load_png_rgb8(path);
  CHECK(back.at(0, 0, 0) == 0.0f);
  CHECK(back.at(0, 0, 1) == 1.0f);
  CHECK(back.at(0, 0, 2) == doctest::Approx(0.25f).epsilon(0.01));
}

TEST_CASE("16-bit grayscale roundtrip resolves sub-micron heights") {
  testutil::TempDir dir("image");
  const double peak = 0.002;
  Eigen::MatrixXd heights(9, 4);
  Rng rng(3, 0);
  for (int r = 0; r < heights.rows(); ++r) {
    for (int c = 0; c < heights.cols(); ++c) heights(r, c) = rng.uniform() * peak;
  }
  const std::string path = dir.file("h.png");
  save_png_gray16(path, heights, peak);
  const Eigen::MatrixXd back = load_png_gray16(path, peak);

  REQUIRE(back.rows() == heights.rows());
  REQUIRE(back.cols() == heights.cols());
  const double step = peak / 65535.0;
  CHECK((back - heights).cwiseAbs().maxCoeff() <= 0.5 * step + 1e-12);
}

TEST_CASE("float image container roundtrips exactly") {
  testutil::TempDir dir("image");
  ImageRgb img = random_image(3, 6, 29);
  img.at(1, 2, 0) = -4.75f;      // radiance values are not confined to [0,1]
  img.at(2, 5, 1) = 1234.5f;
  const std::string path = dir.file("img.fimg");
  save_fimg(path, img);
  const ImageRgb back = load_fimg(path);

  REQUIRE(back.width == img.width);
  REQUIRE(back.height == img.height);
  for (size_t i = 0; i < img.pixels.size(); ++i) CHECK(back.pixels[i] == img.pixels[i]);
}

TEST_CASE("float image container rejects damaged files") {
  testutil::TempDir dir("image");
  const ImageRgb img = random_image(2, 2, 5);
  const std::string path = dir.file("img.fimg");
  save_fimg(path, img);

  {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    out << "zz";
  }
  CHECK_THROWS_WITH_AS(load_fimg(path), doctest::Contains("trailing"), Error);

  const std::string bogus = dir.file("bogus.fimg");
  {
    std::ofstream out(bogus, std::ios::binary);
    out << "NOPE";
  }
  CHECK_THROWS_AS(load_fimg(bogus), Error);
}

TEST_CASE("psnr is infinite for identical images and exact for known noise") {
  const ImageRgb img = random_image(4, 4, 17);
  CHECK(psnr(img, img) == std::numeric_limits<double>::infinity());

  ImageRgb shifted = img;
  for (float& p : shifted.pixels) p += 0.1f;
  CHECK(psnr(img, shifted) == doctest::Approx(20.0).epsilon(1e-4));

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  Eigen::MatrixXd b = Eigen::MatrixXd::Constant(3, 3, 0.5);
  CHECK(psnr(a, b, 2.0) == doctest::Approx(10.0 * std::log10(4.0 / 0.25)).epsilon(1e-12));

  Eigen::MatrixXd c = b;
  CHECK(psnr(b, c, 2.0) == std::numeric_limits<double>::infinity());
}

TEST_CASE("image helpers reject mismatched shapes") {
  const ImageRgb a = random_image(2, 3, 1);
  const ImageRgb b = random_image(3, 2, 1);
  CHECK_THROWS_AS(psnr(a, b), Error);

  ImageRgb broken = a;
  broken.pixels.pop_back();
  testutil::TempDir dir("image");
  CHECK_THROWS_AS(save_png_rgb8(dir.file("broken.png"), broken), Error);

  Eigen::MatrixXd empty;
  CHECK_THROWS_AS(psnr(empty, empty, 1.0), Error);
}
