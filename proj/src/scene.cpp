#include "carsynth/scene.hpp"

#include <cmath>

#include "carsynth/bvh.hpp"
#include "carsynth/error.hpp"
#include "carsynth/procedural.hpp"
#include "json.hpp"

namespace carsynth {

using nlohmann::json;

namespace {

void check_unit(double v, const std::string& what) {
  if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorKind::OutOfRange, what + " must lie in [0, 1]");
}

void check_range(const Range& r, const char* what) {
  if (!(std::isfinite(r.min) && std::isfinite(r.max) && r.min <= r.max))
    throw Error(ErrorKind::ConfigInvalid, std::string("invalid camera range ") + what);
}

}  // namespace

PaintPalette::PaintPalette(std::vector<PaintEntry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw Error(ErrorKind::ConfigInvalid, "paint palette is empty");
  for (const auto& e : entries_) {
    check_unit(e.color.x, "paint color");
    check_unit(e.color.y, "paint color");
    check_unit(e.color.z, "paint color");
    check_unit(e.metallic, "paint metallic");
    check_unit(e.roughness, "paint roughness");
  }
}

PaintPalette PaintPalette::defaults() {
  return PaintPalette({
      {"black", {0.01, 0.01, 0.012}, 0.3, 0.25},
      {"white", {0.8, 0.8, 0.78}, 0.0, 0.3},
      {"silver", {0.55, 0.56, 0.58}, 0.8, 0.3},
      {"gray", {0.18, 0.18, 0.19}, 0.5, 0.3},
      {"red", {0.45, 0.02, 0.02}, 0.2, 0.25},
      {"blue", {0.03, 0.1, 0.45}, 0.4, 0.25},
      {"dark_blue", {0.01, 0.02, 0.1}, 0.5, 0.3},
      {"green", {0.03, 0.18, 0.06}, 0.3, 0.3},
      {"yellow", {0.7, 0.5, 0.02}, 0.1, 0.3},
      {"orange", {0.7, 0.2, 0.02}, 0.1, 0.3},
      {"brown", {0.12, 0.06, 0.03}, 0.4, 0.35},
      {"beige", {0.5, 0.42, 0.3}, 0.2, 0.35},
  });
}

PaintPalette PaintPalette::from_json_text(std::string_view text) {
  try {
    const json doc = json::parse(text);
    std::vector<PaintEntry> entries;
    for (const auto& c : doc.at("colors")) {
      const auto rgb = c.at("color").get<std::vector<double>>();
      if (rgb.size() != 3) throw Error(ErrorKind::ConfigInvalid, "paint color needs 3 components");
      entries.push_back({c.at("name").get<std::string>(), {rgb[0], rgb[1], rgb[2]},
                         c.value("metallic", 0.0), c.value("roughness", 0.3)});
    }
    return PaintPalette(std::move(entries));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigInvalid, std::string("bad palette: ") + e.what());
  }
}

PaintPalette PaintPalette::load(const std::filesystem::path& path) { return from_json_text(read_text_file(path)); }

std::string PaintPalette::to_json_text() const {
  json colors = json::array();
  for (const auto& e : entries_)
    colors.push_back({{"name", e.name},
                      {"color", {e.color.x, e.color.y, e.color.z}},
                      {"metallic", e.metallic},
                      {"roughness", e.roughness}});
  return json{{"colors", colors}}.dump(2) + "\n";
}

void CameraRanges::validate() const {
  check_range(yaw_deg, "yaw_deg");
  check_range(pitch_deg, "pitch_deg");
  check_range(distance, "distance");
  check_range(jitter_deg, "jitter_deg");
  if (!(distance.min > 0)) throw Error(ErrorKind::ConfigInvalid, "camera distance must be positive");
  if (!(vertical_fov_deg > 10 && vertical_fov_deg < 120))
    throw Error(ErrorKind::ConfigInvalid, "vertical_fov_deg must lie in (10, 120)");
  if (!(max_distance_factor > 0)) throw Error(ErrorKind::ConfigInvalid, "max_distance_factor must be positive");
  if (visibility_retries < 1) throw Error(ErrorKind::ConfigInvalid, "visibility_retries must be >= 1");
  // Jitter must stay inside the narrower half-fov for square frames.
  const double j = std::max(std::abs(jitter_deg.min), std::abs(jitter_deg.max));
  if (j >= 0.5 * vertical_fov_deg) throw Error(ErrorKind::ConfigInvalid, "jitter exceeds half the field of view");
}

void SceneDescription::validate() const {
  camera.validate();
  const double limit = 1.1 * mesh.bounding_radius;
  for (const auto& d : damages)
    if (length(d.center) > limit + 1e-9)
      throw Error(ErrorKind::OutOfRange, "damage center outside the inflated bounding sphere");
  if (damages.size() != contexts.size() || damages.size() != damage_parts.size())
    throw Error(ErrorKind::OutOfRange, "damage, context and part lists differ in length");
}

std::vector<DamageCandidate> visible_damage_candidates(const LabeledMesh& mesh, const PartRegistry& registry,
                                                       const Camera& camera, const CompatibilityMatrix& compat,
                                                       double max_distance) {
  std::vector<DamageCandidate> out;
  for (const auto& sm : mesh.submeshes) {
    if (!compat.carries_any(registry.material(sm.part_id))) continue;
    for (std::uint32_t v : mesh.part_vertices(sm.part_id)) {
      const Vec3& p = mesh.vertices[v];
      if (distance(p, camera.position) > max_distance) continue;
      const Projection proj = project_to_raster(camera, p);
      const auto* rp = std::get_if<RasterPoint>(&proj);
      if (rp && in_frame(camera, *rp)) out.push_back({v, sm.part_id});
    }
  }
  return out;
}

std::vector<Environment> builtin_environments() {
  std::vector<Environment> out;
  const Vec3 suns[] = {{0.4, 0.3, 0.85}, {-0.6, 0.5, 0.6}, {0.1, -0.8, 0.5}, {-0.3, -0.2, 0.93}};
  const double exposures[] = {1.0, 0.8, 0.9, 1.1};
  for (int i = 0; i < 4; ++i) {
    SkyParams sky;
    sky.sun_direction = normalize(suns[i]);
    Environment env = Environment::procedural_sky(sky, exposures[i]);
    env.name = "procedural_sky_" + std::to_string(i);
    out.push_back(std::move(env));
  }
  return out;
}

namespace {

/// True when nothing lies between the camera and `target`, and the camera is
/// on the outer side of the surface there.
bool target_visible(const Bvh& bvh, const Vec3& eye, const Vec3& target, const Vec3& normal) {
  const Vec3 d = target - eye;
  if (dot(normal, -d) <= 0) return false;
  const double dist = length(d);
  Ray ray{eye, d / dist, 1e-9, dist * (1.0 - 1e-4) - 1e-4};
  return !bvh.occluded(ray);
}

}  // namespace

SceneDescription sample_scene(const LabeledMesh& mesh, const PartRegistry& registry,
                              const std::optional<DamagePlan>& plan, std::span<const Environment> hdri_pool,
                              const PaintPalette& palette, const SceneConfig& config,
                              std::uint64_t image_seed, Rng& rng) {
  config.camera.validate();
  SceneDescription scene;
  scene.registry = registry;
  scene.compat = config.compat;
  scene.seed = image_seed;

  const std::vector<Environment> builtin = hdri_pool.empty() ? builtin_environments() : std::vector<Environment>{};
  const std::span<const Environment> envs = hdri_pool.empty() ? std::span<const Environment>(builtin) : hdri_pool;
  scene.environment = envs[rng.index(envs.size())];
  scene.paint = palette.entries()[rng.index(palette.entries().size())];

  Vec3 target, target_normal;
  if (plan) {
    DamageSpec primary = plan->primary;
    primary.seed = hash_combine(image_seed, 0);
    scene.damages.push_back(primary);
    scene.contexts.push_back(primary.context());
    scene.damage_parts.push_back(plan->part_id);
    scene.mesh = primary.type == DamageType::Dent ? dent_displace(mesh, primary, scene.contexts.back()) : mesh;
    target = primary.center;
    target_normal = primary.normal;
  } else {
    scene.mesh = mesh;
    if (mesh.vertices.empty()) throw Error(ErrorKind::EmptyScene, "mesh has no vertices");
    const auto v = rng.index(mesh.vertices.size());
    target = mesh.vertices[v];
    target_normal = mesh.normals[v];
  }

  const CameraRanges& cr = config.camera;
  const Bvh bvh(scene.mesh);
  Camera aimed;
  for (int attempt = 0; attempt < cr.visibility_retries; ++attempt) {
    scene.yaw = deg_to_rad(rng.uniform(cr.yaw_deg.min, cr.yaw_deg.max));
    scene.pitch = deg_to_rad(rng.uniform(cr.pitch_deg.min, cr.pitch_deg.max));
    scene.distance = rng.uniform(cr.distance.min, cr.distance.max);
    const CameraPlacement placement = place_camera(target, scene.yaw, scene.pitch, scene.distance);
    scene.degenerate_center = placement.degenerate_center;
    aimed = aim_camera(placement.position, target, cr.vertical_fov_deg, config.resolution);
    scene.primary_visible = bvh.empty() || target_visible(bvh, placement.position, target, target_normal);
    if (scene.primary_visible) break;
  }
  scene.aimed_camera = aimed;
  scene.jitter1 = deg_to_rad(rng.uniform(cr.jitter_deg.min, cr.jitter_deg.max));
  scene.jitter2 = deg_to_rad(rng.uniform(cr.jitter_deg.min, cr.jitter_deg.max));
  scene.camera = jitter_camera(aimed, scene.jitter1, scene.jitter2);

  if (plan) {
    const auto candidates = visible_damage_candidates(scene.mesh, registry, scene.camera, config.compat,
                                                      cr.max_distance_factor * scene.distance);
    std::vector<int> parts;
    auto secondary = secondary_damage_chain(candidates, scene.mesh, registry, config.compat, config.ranges,
                                            config.noise, rng, &parts);
    for (std::size_t i = 0; i < secondary.size(); ++i) {
      secondary[i].seed = hash_combine(image_seed, scene.damages.size());
      scene.damages.push_back(secondary[i]);
      scene.contexts.push_back(secondary[i].context());
      scene.damage_parts.push_back(parts[i]);
    }
    for (std::size_t i = 1; i < scene.damages.size(); ++i)
      if (scene.damages[i].type == DamageType::Dent)
        scene.mesh = dent_displace(scene.mesh, scene.damages[i], scene.contexts[i]);
  }
  return scene;
}

SceneDescription preview_scene(DamageType type, std::uint64_t seed, Resolution resolution,
                               const ParameterRanges& ranges, const NoiseDefaults& noise) {
  SceneDescription scene;
  const char* part_name = "hood";
  if (type == DamageType::GlassShatter) part_name = "front_windshield";
  if (type == DamageType::BrokenLamp) part_name = "left_head_light";
  const auto part = scene.registry.find(part_name);
  if (!part) throw Error(ErrorKind::UnknownPart, std::string("registry lacks ") + part_name);

  const LabeledMesh sphere = make_sphere_mesh(1.0, *part, scene.registry, 0.025);
  Rng rng(seed);
  DamageSpec spec = sample_damage_parameters(type, ranges, noise, rng);
  spec.center = {1, 0, 0};
  spec.normal = {1, 0, 0};
  spec.seed = hash_combine(seed, 0);
  scene.damages = {spec};
  scene.contexts = {spec.context()};
  scene.damage_parts = {*part};
  scene.mesh = type == DamageType::Dent ? dent_displace(sphere, spec, scene.contexts[0]) : sphere;
  scene.paint = {"preview_blue", {0.08, 0.16, 0.4}, 0.3, 0.3};
  scene.environment = Environment::procedural_sky();
  scene.distance = 2.0;
  scene.aimed_camera = aim_camera({3.0, 0.0, 0.0}, spec.center, 40.0, resolution);
  scene.camera = scene.aimed_camera;
  scene.model_id = "test_sphere";
  scene.seed = seed;
  return scene;
}

}  // namespace carsynth
