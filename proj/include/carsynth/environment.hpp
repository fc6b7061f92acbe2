#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "carsynth/math.hpp"

namespace carsynth {

/// Linear RGB float image, row-major, top row first.
struct HdrImage {
  int width = 0;
  int height = 0;
  std::vector<Vec3> pixels;

  const Vec3& at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  Vec3& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// Radiance RGBE (.hdr) reader; handles flat and new-style run-length data.
HdrImage read_hdr(const std::filesystem::path& path);
HdrImage decode_hdr(const std::string& bytes);
/// Flat (uncompressed) RGBE writer.
void write_hdr(const std::filesystem::path& path, const HdrImage& image);

struct SkyParams {
  Vec3 zenith{0.25, 0.45, 0.9};
  Vec3 horizon{0.8, 0.85, 0.9};
  Vec3 ground{0.25, 0.23, 0.2};
  Vec3 sun_direction = normalize(Vec3{0.4, 0.3, 0.85});
  Vec3 sun_color{1.0, 0.95, 0.85};
  double sun_radiance = 1000.0;
  double sun_angular_radius = 0.03;  // radians
};

struct Environment {
  enum class Kind { Equirectangular, ProceduralSky, Solid };

  Kind kind = Kind::ProceduralSky;
  std::string name = "procedural_sky";
  std::shared_ptr<const HdrImage> image;  // Equirectangular only; 2:1 aspect
  Vec3 color{1, 1, 1};                    // Solid only
  SkyParams sky;                          // ProceduralSky only
  double exposure = 1.0;

  static Environment solid(const Vec3& color, double exposure = 1.0);
  static Environment procedural_sky(const SkyParams& sky = {}, double exposure = 1.0);
  /// Throws OutOfRange unless width == 2 * height.
  static Environment equirectangular(std::shared_ptr<const HdrImage> image, std::string name,
                                     double exposure = 1.0);
};

/// Radiance seen along a unit direction (z up). Equirectangular maps use
/// longitude atan2(y, x) and colatitude acos(z), bilinearly filtered.
Vec3 env_lookup(const Vec3& direction, const Environment& env);

/// Solid angle of the procedural sun disk.
double sun_solid_angle(const SkyParams& sky);

/// .hdr files in `dir` (sorted by name), each as an equirectangular
/// environment. A missing or empty directory yields an empty list.
std::vector<Environment> scan_environment_dir(const std::filesystem::path& dir, double exposure = 1.0);

}  // namespace carsynth
