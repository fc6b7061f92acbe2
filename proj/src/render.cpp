#include "carsynth/render.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "carsynth/error.hpp"
#include "json.hpp"

namespace carsynth {

using nlohmann::json;

SurfaceShaderParams SurfaceShaderParams::paint(const PaintEntry& paint) {
  return {paint.color, paint.metallic, paint.roughness, 0.0, 1.0, {}};
}
SurfaceShaderParams SurfaceShaderParams::glass() { return {{1.0, 1.0, 1.0}, 0.0, 0.05, 0.9, 1.0, {}}; }
SurfaceShaderParams SurfaceShaderParams::white() { return {{0.9, 0.9, 0.9}, 0.0, 0.9, 0.0, 1.0, {}}; }
SurfaceShaderParams SurfaceShaderParams::transparent() { return {{0, 0, 0}, 0.0, 1.0, 0.0, 0.0, {}}; }
SurfaceShaderParams SurfaceShaderParams::scratched() { return {{0.12, 0.12, 0.12}, 0.0, 0.9, 0.0, 1.0, {}}; }
SurfaceShaderParams SurfaceShaderParams::neutral() { return {{0.2, 0.2, 0.2}, 0.0, 0.6, 0.0, 1.0, {}}; }

SurfaceShaderParams operator*(const SurfaceShaderParams& s, double k) {
  return {s.base_color * k, s.metallic * k, s.roughness * k, s.transmission * k, s.opacity * k, s.emission * k};
}

SurfaceShaderParams operator+(const SurfaceShaderParams& a, const SurfaceShaderParams& b) {
  return {a.base_color + b.base_color, a.metallic + b.metallic,         a.roughness + b.roughness,
          a.transmission + b.transmission, a.opacity + b.opacity,     a.emission + b.emission};
}

namespace {

Vec3 splat(double v) { return {v, v, v}; }

Vec3 specular_f0(const SurfaceShaderParams& s) { return lerp(splat(0.04), s.base_color, s.metallic); }

Vec3 reflect(const Vec3& d, const Vec3& n) { return d - n * (2.0 * dot(d, n)); }

}  // namespace

BrdfTerms direct_lighting(const SurfaceShaderParams& s, const Vec3& n, const Vec3& view_dir,
                          const Vec3& light_dir, const Vec3& irradiance) {
  BrdfTerms out;
  const double nl = dot(n, light_dir);
  if (nl <= 0) return out;
  const double nv = std::max(dot(n, view_dir), 1e-4);
  const Vec3 received = irradiance * nl;
  out.diffuse = s.base_color * ((1.0 - s.metallic) * (1.0 - s.transmission) / kPi) * received;

  const Vec3 h = normalize(view_dir + light_dir);
  const double nh = std::max(dot(n, h), 0.0);
  const double vh = std::max(dot(view_dir, h), 0.0);
  const double alpha = std::max(s.roughness * s.roughness, 1e-3);
  const double a2 = alpha * alpha;
  const double denom = nh * nh * (a2 - 1.0) + 1.0;
  const double d = a2 / (kPi * denom * denom);
  const double k = (s.roughness + 1.0) * (s.roughness + 1.0) / 8.0;
  const double g = (nl / (nl * (1.0 - k) + k)) * (nv / (nv * (1.0 - k) + k));
  const Vec3 f0 = specular_f0(s);
  const Vec3 f = f0 + (splat(1.0) - f0) * std::pow(1.0 - vh, 5.0);
  out.specular = f * (d * g / (4.0 * nl * nv)) * received;
  return out;
}

Vec3 ambient_irradiance(const Vec3& n, const Environment& env) {
  switch (env.kind) {
    case Environment::Kind::Solid: return env.color * (kPi * env.exposure);
    case Environment::Kind::ProceduralSky: {
      // Cosine-weighted mean of the gradient over the upper hemisphere.
      const SkyParams& s = env.sky;
      const Vec3 sky = s.horizon + (s.zenith - s.horizon) * (2.0 / 3.0);
      const double w = 0.5 * (1.0 + n.z);
      return (sky * w + s.ground * (1.0 - w)) * (kPi * env.exposure);
    }
    case Environment::Kind::Equirectangular: {
      constexpr int kSamples = 16;
      const Vec3 t = any_orthogonal(n);
      const Vec3 b = cross(n, t);
      Vec3 sum;
      for (int i = 0; i < kSamples; ++i) {
        const double u1 = (i + 0.5) / kSamples;
        unsigned bits = static_cast<unsigned>(i);
        double u2 = 0, f = 0.5;
        for (; bits; bits >>= 1, f *= 0.5)
          if (bits & 1u) u2 += f;
        const double r = std::sqrt(u1), phi = 2.0 * kPi * u2;
        const Vec3 dir = t * (r * std::cos(phi)) + b * (r * std::sin(phi)) + n * std::sqrt(1.0 - u1);
        sum += env_lookup(normalize(dir), env);
      }
      return sum * (kPi / kSamples);
    }
  }
  return {};
}

namespace {

SurfaceShaderParams base_shader(MaterialClass m, const SceneDescription& scene) {
  switch (m) {
    case MaterialClass::Metal: return SurfaceShaderParams::paint(scene.paint);
    case MaterialClass::Glass:
    case MaterialClass::Lamp: return SurfaceShaderParams::glass();
    case MaterialClass::Other: break;
  }
  return SurfaceShaderParams::neutral();
}

/// Shader parameters and label in one pass over the damages.
SurfaceShaderParams evaluate_surface(const Vec3& x, int part, const SceneDescription& scene, DamageType& label) {
  const MaterialClass material = scene.registry.material(part);
  SurfaceShaderParams s = base_shader(material, scene);
  label = DamageType::None;
  for (std::size_t i = 0; i < scene.damages.size(); ++i) {
    const DamageSpec& spec = scene.damages[i];
    if (!scene.compat.allows(material, spec.type)) continue;
    if (distance(x, spec.center) > footprint_radius(spec)) continue;
    const NoiseContext& ctx = scene.contexts[i];
    bool hit = false;
    switch (spec.type) {
      case DamageType::Dent: hit = dent_radius(x, spec, ctx) < spec.area; break;
      case DamageType::Scratch: {
        const double f = scratch_factor(x, spec, ctx);
        s = mix(f, SurfaceShaderParams::scratched(), s);
        hit = f >= 0.5;
        break;
      }
      case DamageType::Crack: {
        const double f = crack_factor(x, spec, ctx);
        s = mix(f, SurfaceShaderParams::transparent(), s);
        hit = f >= 0.5;
        break;
      }
      case DamageType::GlassShatter: {
        const double f = shatter_factor(x, spec, ctx);
        s = mix(f, SurfaceShaderParams::white(), s);
        hit = f == 1.0;
        break;
      }
      case DamageType::BrokenLamp: {
        const LampFactors f = broken_lamp_factors(x, spec, ctx);
        s = mix(f.chunk, SurfaceShaderParams::transparent(), mix(f.fracture, SurfaceShaderParams::white(), s));
        hit = f.chunk == 1.0 || f.fracture == 1.0;
        break;
      }
      case DamageType::None: break;
    }
    if (hit && label == DamageType::None) label = spec.type;
  }
  return s;
}

Vec3 surface_color(const SurfaceShaderParams& s, const Vec3& x, const Vec3& n, const Vec3& view_dir,
                   const Environment& env, const Bvh* shadows) {
  const Vec3 e_amb = ambient_irradiance(n, env);
  const double nv = std::max(dot(n, view_dir), 1e-4);
  const Vec3 f0 = specular_f0(s);
  const Vec3 f_env = f0 + (vmax(splat(1.0 - s.roughness), f0) - f0) * std::pow(1.0 - nv, 5.0);
  const Vec3 kd = (splat(1.0) - f_env) * ((1.0 - s.metallic) * (1.0 - s.transmission));
  const Vec3 reflected = env_lookup(normalize(reflect(-view_dir, n)), env);
  const Vec3 l_spec = lerp(reflected, e_amb / kPi, s.roughness);
  Vec3 color = kd * s.base_color * e_amb / kPi + f_env * l_spec + s.emission;

  if (env.kind == Environment::Kind::ProceduralSky) {
    const SkyParams& sky = env.sky;
    const Vec3 l = sky.sun_direction;
    if (dot(n, l) > 0) {
      const bool blocked = shadows && shadows->occluded(Ray{x + n * 1e-4, l, 1e-6});
      if (!blocked) {
        const Vec3 e_sun = sky.sun_color * (sky.sun_radiance * sun_solid_angle(sky) * env.exposure);
        color += direct_lighting(s, n, view_dir, l, e_sun).total();
      }
    }
  }
  return color;
}

}  // namespace

SurfaceShaderParams surface_params(const Vec3& x, int part, const SceneDescription& scene) {
  DamageType label;
  return evaluate_surface(x, part, scene, label);
}

DamageType part_damage_label(const Vec3& x, int part, const SceneDescription& scene) {
  DamageType label;
  evaluate_surface(x, part, scene, label);
  return label;
}

ShadeResult shade_point(const Vec3& x, const Vec3& n, const Vec3& view_dir, int part,
                        const SceneDescription& scene, const Bvh* shadows) {
  ShadeResult r;
  r.params = evaluate_surface(x, part, scene, r.label);
  r.color = surface_color(r.params, x, n, view_dir, scene.environment, shadows);
  return r;
}

std::string_view to_string(RenderQuality q) { return q == RenderQuality::Full ? "full" : "preview"; }

RenderQuality render_quality_from_string(std::string_view name) {
  if (name == "full") return RenderQuality::Full;
  if (name == "preview") return RenderQuality::Preview;
  throw Error(ErrorKind::ConfigInvalid, "unknown render quality '" + std::string(name) + "'");
}

namespace {

constexpr int kMaxTransmissionDepth = 3;

struct SurfaceHit {
  Vec3 x;
  Vec3 n;
  int part = 0;
};

class Tracer {
 public:
  Tracer(const SceneDescription& scene, const Bvh& bvh) : scene_(scene), bvh_(bvh) {
    tri_part_.resize(scene.mesh.triangles.size());
    for (const auto& sm : scene.mesh.submeshes)
      std::fill_n(tri_part_.begin() + static_cast<std::ptrdiff_t>(sm.first_triangle), sm.triangle_count,
                  sm.part_id);
  }

  std::optional<SurfaceHit> first_hit(const Ray& ray) const {
    const auto hit = bvh_.intersect(ray);
    if (!hit) return std::nullopt;
    const LabeledMesh& m = scene_.mesh;
    const Triangle& t = m.triangles[hit->triangle];
    const double b0 = 1.0 - hit->b1 - hit->b2;
    SurfaceHit s;
    s.x = ray.origin + ray.direction * hit->t;
    Vec3 ng = cross(m.vertices[t[1]] - m.vertices[t[0]], m.vertices[t[2]] - m.vertices[t[0]]);
    Vec3 n = m.normals[t[0]] * b0 + m.normals[t[1]] * hit->b1 + m.normals[t[2]] * hit->b2;
    if (length(n) < 1e-12) n = ng;
    n = normalize(n);
    if (dot(ng, ray.direction) > 0) n = -n;  // seen from inside
    if (dot(n, ray.direction) > 0) n = normalize(n - ray.direction * (2.0 * dot(n, ray.direction)));
    s.n = n;
    s.part = tri_part_[hit->triangle];
    return s;
  }

  /// Radiance along the ray; fills the ids of the first surface when asked.
  Vec3 trace(const Ray& ray, int depth, std::uint8_t* part_id, std::uint8_t* damage_id) const {
    const auto hit = first_hit(ray);
    if (!hit) return env_lookup(ray.direction, scene_.environment);
    DamageType label;
    const SurfaceShaderParams s = evaluate_surface(hit->x, hit->part, scene_, label);
    if (part_id) *part_id = static_cast<std::uint8_t>(hit->part);
    if (damage_id) *damage_id = static_cast<std::uint8_t>(label);
    if (s.opacity < 0.5) return env_lookup(ray.direction, scene_.environment);

    const Vec3 view = -ray.direction;
    Vec3 color = surface_color(s, hit->x, hit->n, view, scene_.environment, &bvh_);
    if (s.transmission > 0) {
      const Vec3 behind = depth < kMaxTransmissionDepth
                              ? trace(Ray{hit->x, ray.direction, 1e-6}, depth + 1, nullptr, nullptr)
                              : env_lookup(ray.direction, scene_.environment);
      const double nv = std::max(dot(hit->n, view), 1e-4);
      const double fresnel = 0.04 + 0.96 * std::pow(1.0 - nv, 5.0);
      color += behind * (s.transmission * (1.0 - fresnel));
    }
    return color;
  }

  void ids(const Ray& ray, std::uint8_t& part_id, std::uint8_t& damage_id) const {
    const auto hit = first_hit(ray);
    if (!hit) return;
    part_id = static_cast<std::uint8_t>(hit->part);
    damage_id = static_cast<std::uint8_t>(part_damage_label(hit->x, hit->part, scene_));
  }

 private:
  const SceneDescription& scene_;
  const Bvh& bvh_;
  std::vector<int> tri_part_;
};

}  // namespace

RenderOutput render(const SceneDescription& scene, RenderQuality quality, int threads) {
  const Camera& cam = scene.camera;
  if (cam.resolution.width <= 0 || cam.resolution.height <= 0)
    throw Error(ErrorKind::EmptyScene, "scene has an empty frame");
  try {
    cam.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::EmptyScene, std::string("invalid scene camera: ") + e.what());
  }

  const int w = cam.resolution.width, h = cam.resolution.height;
  RenderOutput out;
  out.rgb = RgbImage(w, h);
  out.part_map = LabelImage(w, h);
  out.damage_map = LabelImage(w, h);
  out.metadata = scene_metadata(scene);

  const Bvh bvh(scene.mesh);
  const Tracer tracer(scene, bvh);
  const bool full = quality == RenderQuality::Full;
  static constexpr double kStrata[4][2] = {{0.25, 0.25}, {0.75, 0.25}, {0.25, 0.75}, {0.75, 0.75}};

  auto ray_through = [&](double u, double v) { return Ray{cam.position, cam.ray_direction(u, v)}; };

  constexpr int kTile = 16;
  const int tiles_x = (w + kTile - 1) / kTile, tiles_y = (h + kTile - 1) / kTile;
  const int tile_count = tiles_x * tiles_y;
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int tile = next++; tile < tile_count; tile = next++) {
      const int x0 = (tile % tiles_x) * kTile, y0 = (tile / tiles_x) * kTile;
      for (int y = y0; y < std::min(y0 + kTile, h); ++y)
        for (int x = x0; x < std::min(x0 + kTile, w); ++x) {
          std::uint8_t& part_id = out.part_map.at(x, y);
          std::uint8_t& damage_id = out.damage_map.at(x, y);
          if (full) {
            Vec3 sum;
            for (const auto& s : kStrata) sum += tracer.trace(ray_through(x + s[0], y + s[1]), 0, nullptr, nullptr);
            out.rgb.at(x, y) = sum * 0.25;
            tracer.ids(ray_through(x + 0.5, y + 0.5), part_id, damage_id);
          } else {
            out.rgb.at(x, y) = tracer.trace(ray_through(x + 0.5, y + 0.5), 0, &part_id, &damage_id);
          }
        }
    }
  };

  int n = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  n = std::clamp(n, 1, tile_count);
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return out;
}

namespace {

json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

json camera_json(const Camera& c) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back(vec_json(c.orientation.row(r)));
  return {{"position", vec_json(c.position)},
          {"orientation", rows},
          {"vertical_fov_deg", c.vertical_fov_deg},
          {"resolution", {c.resolution.width, c.resolution.height}}};
}

}  // namespace

std::string scene_metadata(const SceneDescription& scene) {
  json damages = json::array();
  for (std::size_t i = 0; i < scene.damages.size(); ++i) {
    const DamageSpec& d = scene.damages[i];
    const int part = i < scene.damage_parts.size() ? scene.damage_parts[i] : 0;
    json rec = {{"type", std::string(to_string(d.type))},
                {"code", static_cast<int>(d.type)},
                {"role", i == 0 ? "primary" : "secondary"},
                {"part_id", part},
                {"part", scene.registry.contains(part) ? scene.registry.at(part).name : ""},
                {"center", vec_json(d.center)},
                {"normal", vec_json(d.normal)},
                {"area", d.area},
                {"seed", d.seed}};
    switch (d.type) {
      case DamageType::Dent: rec["depth"] = d.depth; break;
      case DamageType::Crack: rec["line_width"] = d.line_width; break;
      case DamageType::GlassShatter:
        rec["ring_scale"] = d.ring_scale;
        rec["thickness"] = d.thickness;
        rec["line_count"] = d.line_count;
        break;
      case DamageType::BrokenLamp:
        rec["thickness"] = d.thickness;
        rec["chunk_radius"] = d.chunk_radius;
        break;
      default: break;
    }
    damages.push_back(std::move(rec));
  }
  const json doc = {
      {"seed", scene.seed},
      {"model", scene.model_id},
      {"damages", damages},
      {"camera", camera_json(scene.camera)},
      {"placement",
       {{"yaw_deg", rad_to_deg(scene.yaw)},
        {"pitch_deg", rad_to_deg(scene.pitch)},
        {"distance", scene.distance},
        {"jitter_deg", {rad_to_deg(scene.jitter1), rad_to_deg(scene.jitter2)}},
        {"degenerate_center", scene.degenerate_center},
        {"primary_visible", scene.primary_visible}}},
      {"environment", {{"name", scene.environment.name}, {"exposure", scene.environment.exposure}}},
      {"paint",
       {{"name", scene.paint.name},
        {"color", vec_json(scene.paint.color)},
        {"metallic", scene.paint.metallic},
        {"roughness", scene.paint.roughness}}},
  };
  return doc.dump(2) + "\n";
}

}  // namespace carsynth
