#include "carsynth/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include "carsynth/error.hpp"

namespace carsynth {

double tone_map(double linear) {
  constexpr double kExposure = 2.0;
  constexpr double kWhite2 = 16.0;
  const double c = std::max(linear, 0.0) * kExposure;
  const double mapped = std::min(c * (1.0 + c / kWhite2) / (1.0 + c), 1.0);
  return mapped <= 0.0031308 ? 12.92 * mapped : 1.055 * std::pow(mapped, 1.0 / 2.4) - 0.055;
}

std::uint8_t to_srgb8(double linear) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(tone_map(linear), 0.0, 1.0) * 255.0));
}

std::vector<std::uint8_t> tone_map_image(const RgbImage& image) {
  std::vector<std::uint8_t> out;
  out.reserve(image.pixels.size() * 3);
  for (const auto& p : image.pixels) {
    out.push_back(to_srgb8(p.x));
    out.push_back(to_srgb8(p.y));
    out.push_back(to_srgb8(p.z));
  }
  return out;
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_error_fn(png_structp, png_const_charp msg) { throw Error(ErrorKind::IoFailure, msg); }
void png_warning_fn(png_structp, png_const_charp) {}

void write_png(const std::filesystem::path& path, int width, int height, int color_type, int channels,
               const std::uint8_t* data) {
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw Error(ErrorKind::IoFailure, "cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warning_fn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(ErrorKind::IoFailure, "libpng initialization failed");
  }
  try {
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, color_type,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < height; ++y)
      png_write_row(png, data + static_cast<std::size_t>(y) * width * channels);
    png_write_end(png, nullptr);
  } catch (...) {
    png_destroy_write_struct(&png, &info);
    throw;
  }
  png_destroy_write_struct(&png, &info);
  if (std::fflush(file.get()) != 0) throw Error(ErrorKind::IoFailure, "cannot write " + path.string());
}

std::vector<std::uint8_t> read_png(const std::filesystem::path& path, int expected_type, int channels,
                                   int& width, int& height) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw Error(ErrorKind::IoFailure, "cannot read " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warning_fn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(ErrorKind::IoFailure, "libpng initialization failed");
  }
  std::vector<std::uint8_t> data;
  try {
    png_init_io(png, file.get());
    png_read_info(png, info);
    if (png_get_bit_depth(png, info) != 8 || png_get_color_type(png, info) != expected_type)
      throw Error(ErrorKind::ParseError, path.string() + ": unexpected PNG pixel format");
    width = static_cast<int>(png_get_image_width(png, info));
    height = static_cast<int>(png_get_image_height(png, info));
    data.resize(static_cast<std::size_t>(width) * height * channels);
    for (int y = 0; y < height; ++y)
      png_read_row(png, data.data() + static_cast<std::size_t>(y) * width * channels, nullptr);
  } catch (...) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw;
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return data;
}

}  // namespace

void write_png_rgb8(const std::filesystem::path& path, int width, int height,
                    const std::vector<std::uint8_t>& rgb) {
  if (rgb.size() != static_cast<std::size_t>(width) * height * 3)
    throw Error(ErrorKind::OutOfRange, "RGB buffer size does not match the image size");
  write_png(path, width, height, PNG_COLOR_TYPE_RGB, 3, rgb.data());
}

void write_png_rgb(const std::filesystem::path& path, const RgbImage& image) {
  write_png_rgb8(path, image.width, image.height, tone_map_image(image));
}

void write_png_gray(const std::filesystem::path& path, const LabelImage& image) {
  write_png(path, image.width, image.height, PNG_COLOR_TYPE_GRAY, 1, image.pixels.data());
}

LabelImage read_png_gray(const std::filesystem::path& path) {
  LabelImage img;
  img.pixels = read_png(path, PNG_COLOR_TYPE_GRAY, 1, img.width, img.height);
  return img;
}

std::vector<std::uint8_t> read_png_rgb8(const std::filesystem::path& path, int& width, int& height) {
  return read_png(path, PNG_COLOR_TYPE_RGB, 3, width, height);
}

}  // namespace carsynth
