#include "objf/image/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

#include "objf/common/binary_io.hpp"
#include "objf/common/error.hpp"

namespace objf {

namespace {

constexpr int kMaxImageDim = 1 << 16;

struct FileHandle {
  FILE* fp = nullptr;
  explicit FileHandle(const std::string& path, const char* mode) : fp(std::fopen(path.c_str(), mode)) {}
  ~FileHandle() {
    if (fp) std::fclose(fp);
  }
  FileHandle(const FileHandle&) = delete;
  FileHandle& operator=(const FileHandle&) = delete;
};

uint8_t to_byte(float v) {
  const float clamped = std::clamp(v, 0.0f, 1.0f);
  return static_cast<uint8_t>(std::lround(clamped * 255.0f));
}

void check_dims(int width, int height, const char* verb) {
  if (width < 1 || height < 1 || width > kMaxImageDim || height > kMaxImageDim) {
    throw Error(ErrorKind::Validation, "image",
                std::string("cannot ") + verb + " image with dimensions " + std::to_string(width) +
                    "x" + std::to_string(height));
  }
}

}  // namespace

void save_png_rgb8(const std::string& path, const ImageRgb& image) {
  check_dims(image.width, image.height, "save");
  if (image.pixels.size() != image.pixel_count() * 3) {
    throw Error(ErrorKind::Validation, "image", "pixel buffer size does not match image dimensions");
  }

  std::vector<uint8_t> bytes(image.pixel_count() * 3);
  for (size_t i = 0; i < bytes.size(); ++i) bytes[i] = to_byte(image.pixels[i]);
  std::vector<png_bytep> rows(image.height);
  for (int y = 0; y < image.height; ++y) rows[y] = bytes.data() + static_cast<size_t>(y) * image.width * 3;

  FileHandle file(path, "wb");
  if (!file.fp) throw Error(ErrorKind::Io, "image", "failed to open " + path + " for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorKind::Io, "image", "failed to write " + path);
  }
  png_init_io(png, file.fp);
  png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

ImageRgb load_png_rgb8(const std::string& path) {
  FileHandle file(path, "rb");
  if (!file.fp) throw Error(ErrorKind::Io, "image", "failed to open " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  std::vector<uint8_t> bytes;
  std::vector<png_bytep> rows;
  ImageRgb image;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorKind::Parse, "image", "failed to decode " + path);
  }
  png_init_io(png, file.fp);
  png_read_info(png, info);

  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);

  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  if (png_get_channels(png, info) != 3 || png_get_bit_depth(png, info) != 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorKind::Parse, "image", path + " did not decode to 8-bit RGB");
  }

  image.width = width;
  image.height = height;
  bytes.resize(static_cast<size_t>(width) * height * 3);
  rows.resize(height);
  for (int y = 0; y < height; ++y) rows[y] = bytes.data() + static_cast<size_t>(y) * width * 3;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  image.pixels.resize(bytes.size());
  for (size_t i = 0; i < bytes.size(); ++i) image.pixels[i] = bytes[i] / 255.0f;
  return image;
}

void save_png_gray16(const std::string& path, const Eigen::MatrixXd& values, double max_value) {
  const int height = static_cast<int>(values.rows());
  const int width = static_cast<int>(values.cols());
  check_dims(width, height, "save");
  if (!(max_value > 0.0)) {
    throw Error(ErrorKind::Validation, "image", "grayscale peak value must be positive");
  }

  // PNG 16-bit samples are big-endian; pack explicitly instead of relying
  // on a host-order swap.
  std::vector<uint8_t> bytes(static_cast<size_t>(width) * height * 2);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double normalized = std::clamp(values(y, x) / max_value, 0.0, 1.0);
      const auto q = static_cast<uint16_t>(std::lround(normalized * 65535.0));
      const size_t at = (static_cast<size_t>(y) * width + x) * 2;
      bytes[at] = static_cast<uint8_t>(q >> 8);
      bytes[at + 1] = static_cast<uint8_t>(q & 0xff);
    }
  }
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y) rows[y] = bytes.data() + static_cast<size_t>(y) * width * 2;

  FileHandle file(path, "wb");
  if (!file.fp) throw Error(ErrorKind::Io, "image", "failed to open " + path + " for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorKind::Io, "image", "failed to write " + path);
  }
  png_init_io(png, file.fp);
  png_set_IHDR(png, info, width, height, 16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Eigen::MatrixXd load_png_gray16(const std::string& path, double max_value) {
  if (!(max_value > 0.0)) {
    throw Error(ErrorKind::Validation, "image", "grayscale peak value must be positive");
  }
  FileHandle file(path, "rb");
  if (!file.fp) throw Error(ErrorKind::Io, "image", "failed to open " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  std::vector<uint8_t> bytes;
  std::vector<png_bytep> rows;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorKind::Parse, "image", "failed to decode " + path);
  }
  png_init_io(png, file.fp);
  png_read_info(png, info);

  if (png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY || png_get_bit_depth(png, info) != 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorKind::Parse, "image", path + " is not a 16-bit grayscale image");
  }
  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));

  bytes.resize(static_cast<size_t>(width) * height * 2);
  rows.resize(height);
  for (int y = 0; y < height; ++y) rows[y] = bytes.data() + static_cast<size_t>(y) * width * 2;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Eigen::MatrixXd values(height, width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const size_t at = (static_cast<size_t>(y) * width + x) * 2;
      const uint16_t q = static_cast<uint16_t>((bytes[at] << 8) | bytes[at + 1]);
      values(y, x) = q / 65535.0 * max_value;
    }
  }
  return values;
}

void save_fimg(const std::string& path, const ImageRgb& image) {
  check_dims(image.width, image.height, "save");
  if (image.pixels.size() != image.pixel_count() * 3) {
    throw Error(ErrorKind::Validation, "image", "pixel buffer size does not match image dimensions");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "image", "failed to open " + path + " for writing");
  BinaryWriter w(out);
  w.write_magic("FIMG");
  w.write_u32(static_cast<uint32_t>(image.width));
  w.write_u32(static_cast<uint32_t>(image.height));
  w.write_u32(0);
  for (size_t i = 0; i < image.pixel_count(); ++i) {
    w.write_f32(image.pixels[i * 3 + 0]);
    w.write_f32(image.pixels[i * 3 + 1]);
    w.write_f32(image.pixels[i * 3 + 2]);
    w.write_f32(1.0f);
  }
  out.flush();
  if (!out.good()) throw Error(ErrorKind::Io, "image", "failed to write " + path);
}

ImageRgb load_fimg(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "image", "failed to open " + path);
  BinaryReader r(in, "image");
  r.expect_magic("FIMG");
  const uint32_t width = r.read_u32();
  const uint32_t height = r.read_u32();
  r.read_u32();
  if (width < 1 || height < 1 || width > kMaxImageDim || height > kMaxImageDim) {
    throw Error(ErrorKind::Parse, "image", "image dimensions out of range in " + path);
  }
  ImageRgb image = ImageRgb::create(static_cast<int>(width), static_cast<int>(height));
  for (size_t i = 0; i < image.pixel_count(); ++i) {
    image.pixels[i * 3 + 0] = r.read_f32();
    image.pixels[i * 3 + 1] = r.read_f32();
    image.pixels[i * 3 + 2] = r.read_f32();
    r.read_f32();
  }
  if (!r.at_eof()) throw Error(ErrorKind::Parse, "image", "trailing bytes after pixel data in " + path);
  return image;
}

double psnr(const ImageRgb& a, const ImageRgb& b, double max_value) {
  if (a.width != b.width || a.height != b.height) {
    throw Error(ErrorKind::Validation, "image", "cannot compare images with different dimensions");
  }
  if (a.pixels.empty()) {
    throw Error(ErrorKind::Validation, "image", "cannot compare empty images");
  }
  double sum = 0.0;
  for (size_t i = 0; i < a.pixels.size(); ++i) {
    const double d = static_cast<double>(a.pixels[i]) - b.pixels[i];
    sum += d * d;
  }
  const double mse = sum / static_cast<double>(a.pixels.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(max_value * max_value / mse);
}

double psnr(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double max_value) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::Validation, "image", "cannot compare images with different dimensions");
  }
  if (a.size() == 0) {
    throw Error(ErrorKind::Validation, "image", "cannot compare empty images");
  }
  const double mse = (a - b).squaredNorm() / static_cast<double>(a.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(max_value * max_value / mse);
}

}  // namespace objf
