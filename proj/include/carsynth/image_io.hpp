#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "carsynth/math.hpp"

namespace carsynth {

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<Vec3> pixels;  // linear RGB, row-major

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h) {}
  Vec3& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  const Vec3& at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// Single-channel 8-bit image holding raw integer ids.
struct LabelImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  LabelImage() = default;
  LabelImage(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, 0) {}
  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  friend bool operator==(const LabelImage&, const LabelImage&) = default;
};

/// Reinhard (white point 4) after a 2x exposure, then the sRGB transfer curve.
double tone_map(double linear);
std::uint8_t to_srgb8(double linear);
std::vector<std::uint8_t> tone_map_image(const RgbImage& image);

void write_png_rgb8(const std::filesystem::path& path, int width, int height,
                    const std::vector<std::uint8_t>& rgb);
void write_png_rgb(const std::filesystem::path& path, const RgbImage& image);
void write_png_gray(const std::filesystem::path& path, const LabelImage& image);

/// Reads an 8-bit grayscale PNG without any conversion. Throws IoFailure for
/// unreadable files and ParseError for other pixel formats.
LabelImage read_png_gray(const std::filesystem::path& path);
/// Reads an 8-bit RGB PNG as raw bytes.
std::vector<std::uint8_t> read_png_rgb8(const std::filesystem::path& path, int& width, int& height);

}  // namespace carsynth
