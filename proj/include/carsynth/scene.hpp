#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "carsynth/camera.hpp"
#include "carsynth/damage.hpp"
#include "carsynth/environment.hpp"
#include "carsynth/mesh.hpp"

namespace carsynth {

struct PaintEntry {
  std::string name;
  Vec3 color;  // linear RGB
  double metallic = 0;
  double roughness = 0.3;
};

class PaintPalette {
 public:
  /// Built-in palette; data/palette.json holds the same list.
  static PaintPalette defaults();
  static PaintPalette from_json_text(std::string_view text);
  static PaintPalette load(const std::filesystem::path& path);

  explicit PaintPalette(std::vector<PaintEntry> entries);

  std::string to_json_text() const;
  const std::vector<PaintEntry>& entries() const noexcept { return entries_; }

 private:
  std::vector<PaintEntry> entries_;
};

/// Sampling intervals for the camera, in degrees and model units.
struct CameraRanges {
  Range yaw_deg{-60, 60};
  Range pitch_deg{-30, 10};
  Range distance{0.8, 3.0};
  Range jitter_deg{-5, 5};
  double vertical_fov_deg = 50.0;
  double max_distance_factor = 1.5;  // secondary candidates: factor * camera distance
  int visibility_retries = 16;

  void validate() const;
};

struct SceneConfig {
  CameraRanges camera;
  Resolution resolution;
  CompatibilityMatrix compat = CompatibilityMatrix::defaults();
  ParameterRanges ranges;
  NoiseDefaults noise = NoiseDefaults::defaults();
};

struct SceneDescription {
  LabeledMesh mesh;                   // after all dents
  std::vector<DamageSpec> damages;    // application order; primary first
  std::vector<NoiseContext> contexts; // one per damage
  std::vector<int> damage_parts;      // part carrying each damage center
  Camera camera;
  Camera aimed_camera;                // before jitter
  Environment environment;
  PaintEntry paint;
  PartRegistry registry = PartRegistry::defaults();
  CompatibilityMatrix compat = CompatibilityMatrix::defaults();
  std::string model_id;
  std::uint64_t seed = 0;

  double yaw = 0, pitch = 0, distance = 0, jitter1 = 0, jitter2 = 0;  // radians / model units
  bool degenerate_center = false;
  bool primary_visible = true;  // false when every retry was occluded

  /// Throws when a damage center lies outside 1.1x the bounding sphere or
  /// the camera is invalid.
  void validate() const;
};

/// Vertices of damage-carrying parts that project inside the frame at
/// camera distance <= max_distance.
std::vector<DamageCandidate> visible_damage_candidates(const LabeledMesh& mesh, const PartRegistry& registry,
                                                       const Camera& camera, const CompatibilityMatrix& compat,
                                                       double max_distance);

/// Procedural skies used when no HDR maps are supplied.
std::vector<Environment> builtin_environments();

/// Assembles a scene. With a plan, the primary damage (and any secondary
/// dents) are applied to `mesh`; without one the camera targets a uniform
/// random vertex and the scene carries no damage. Damage seeds are
/// hash_combine(image_seed, ordinal).
SceneDescription sample_scene(const LabeledMesh& mesh, const PartRegistry& registry,
                              const std::optional<DamagePlan>& plan, std::span<const Environment> hdri_pool,
                              const PaintPalette& palette, const SceneConfig& config,
                              std::uint64_t image_seed, Rng& rng);

/// Test-sphere scene for inspecting one damage type: a unit sphere labeled
/// with a part that accepts `type`, the damage centered at (1, 0, 0) with
/// parameters drawn from `ranges`, viewed head-on under the default sky.
SceneDescription preview_scene(DamageType type, std::uint64_t seed, Resolution resolution,
                               const ParameterRanges& ranges = {},
                               const NoiseDefaults& noise = NoiseDefaults::defaults());

}  // namespace carsynth
