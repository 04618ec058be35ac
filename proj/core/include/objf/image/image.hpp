#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace objf {

// Linear-light RGB image, float per channel, row-major from the top-left.
struct ImageRgb {
  int width = 0;
  int height = 0;
  std::vector<float> pixels;  // 3 floats per pixel

  static ImageRgb create(int width, int height, float fill = 0.0f) {
    ImageRgb img;
    img.width = width;
    img.height = height;
    img.pixels.assign(static_cast<size_t>(width) * height * 3, fill);
    return img;
  }

  float& at(int x, int y, int channel) {
    return pixels[(static_cast<size_t>(y) * width + x) * 3 + channel];
  }
  float at(int x, int y, int channel) const {
    return pixels[(static_cast<size_t>(y) * width + x) * 3 + channel];
  }
  size_t pixel_count() const { return static_cast<size_t>(width) * height; }
};

// 8-bit RGB PNG; values are clamped to [0,1] and scaled, no gamma applied.
void save_png_rgb8(const std::string& path, const ImageRgb& image);
ImageRgb load_png_rgb8(const std::string& path);

// 16-bit grayscale PNG with values quantized over [0, max_value].
void save_png_gray16(const std::string& path, const Eigen::MatrixXd& values, double max_value);
Eigen::MatrixXd load_png_gray16(const std::string& path, double max_value);

// Float image container: magic, dimensions, then one RGBA float quad per
// pixel. Lossless storage for rendered radiance.
void save_fimg(const std::string& path, const ImageRgb& image);
ImageRgb load_fimg(const std::string& path);

// Peak signal-to-noise ratio in dB against the given peak value; infinity
// for identical inputs.
double psnr(const ImageRgb& a, const ImageRgb& b, double max_value = 1.0);
double psnr(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double max_value);

}  // namespace objf
