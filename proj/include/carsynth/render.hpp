#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "carsynth/bvh.hpp"
#include "carsynth/damage.hpp"
#include "carsynth/image_io.hpp"
#include "carsynth/scene.hpp"

namespace carsynth {

struct SurfaceShaderParams {
  Vec3 base_color{0.5, 0.5, 0.5};
  double metallic = 0;
  double roughness = 0.5;
  double transmission = 0;
  double opacity = 1;
  Vec3 emission;

  static SurfaceShaderParams paint(const PaintEntry& paint);  // S_p
  static SurfaceShaderParams glass();                         // S_g
  static SurfaceShaderParams white();                         // S_w
  static SurfaceShaderParams transparent();                   // S_alpha
  static SurfaceShaderParams scratched();                     // S_d
  static SurfaceShaderParams neutral();                       // wheels, plates

  friend SurfaceShaderParams operator*(const SurfaceShaderParams& s, double k);
  friend SurfaceShaderParams operator+(const SurfaceShaderParams& a, const SurfaceShaderParams& b);
  friend bool operator==(const SurfaceShaderParams&, const SurfaceShaderParams&) = default;
};

/// Reflected radiance from one light, split into lobes.
struct BrdfTerms {
  Vec3 diffuse;
  Vec3 specular;
  Vec3 total() const { return diffuse + specular; }
};

/// Lambert + GGX (Smith-Schlick geometry, Schlick Fresnel) response to a
/// light of irradiance `irradiance` (measured perpendicular to light_dir).
/// view_dir and light_dir point away from the surface.
BrdfTerms direct_lighting(const SurfaceShaderParams& s, const Vec3& n, const Vec3& view_dir,
                          const Vec3& light_dir, const Vec3& irradiance);

/// Irradiance arriving at a surface with normal n from the environment,
/// excluding the procedural sun (which is a separate directional light).
Vec3 ambient_irradiance(const Vec3& n, const Environment& env);

/// Base shader by material class with every compatible damage folded in,
/// in application order.
SurfaceShaderParams surface_params(const Vec3& x, int part, const SceneDescription& scene);

struct ShadeResult {
  Vec3 color;           // surface response only; transmission handled by the caller
  DamageType label = DamageType::None;
  SurfaceShaderParams params;
};

/// Shades surface point x of `part`. When `shadows` is given the procedural
/// sun is tested for occlusion.
ShadeResult shade_point(const Vec3& x, const Vec3& n, const Vec3& view_dir, int part,
                        const SceneDescription& scene, const Bvh* shadows = nullptr);

/// Damage type labelled at x on `part`: damage_label restricted to damages the
/// part's material can carry.
DamageType part_damage_label(const Vec3& x, int part, const SceneDescription& scene);

enum class RenderQuality { Preview, Full };

std::string_view to_string(RenderQuality q);
RenderQuality render_quality_from_string(std::string_view name);

struct RenderOutput {
  RgbImage rgb;
  LabelImage part_map;
  LabelImage damage_map;
  std::string metadata;  // JSON record of the scene
};

/// Threads = 0 uses the hardware concurrency. Output does not depend on the
/// thread count.
RenderOutput render(const SceneDescription& scene, RenderQuality quality, int threads = 0);

/// JSON description of the scene (damages, camera, environment, paint).
std::string scene_metadata(const SceneDescription& scene);

}  // namespace carsynth
