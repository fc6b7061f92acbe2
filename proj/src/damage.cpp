#include "carsynth/damage.hpp"

#include <algorithm>
#include <cmath>

namespace carsynth {

std::string_view to_string(DamageType t) {
  switch (t) {
    case DamageType::None: return "none";
    case DamageType::Dent: return "dent";
    case DamageType::Scratch: return "scratch";
    case DamageType::Crack: return "crack";
    case DamageType::GlassShatter: return "glass_shatter";
    case DamageType::BrokenLamp: return "broken_lamp";
  }
  return "none";
}

DamageType damage_type_from_string(std::string_view name) {
  for (int code = 0; code <= 5; ++code) {
    const auto t = static_cast<DamageType>(code);
    if (name == to_string(t) || name == std::to_string(code)) return t;
  }
  if (name == "shatter") return DamageType::GlassShatter;
  if (name == "lamp") return DamageType::BrokenLamp;
  throw Error(ErrorKind::ParseError, "unknown damage type '" + std::string(name) + "'");
}

DamageNoise DamageNoise::silent() {
  DamageNoise n;
  n.perlin.amplitude = 0;
  n.voronoi_color.amplitude = 0;
  n.wave.distortion = 0;
  n.jitter = 0;
  return n;
}

void DamageNoise::validate() const {
  perlin.validate();
  voronoi_color.validate();
  voronoi_distance.validate();
  wave.validate();
  if (!(jitter >= 0 && jitter < 1)) throw Error(ErrorKind::OutOfRange, "jitter must lie in [0, 1)");
}

// ---------------------------------------------------------------------------

CompatibilityMatrix CompatibilityMatrix::defaults() {
  CompatibilityMatrix m;
  m.set(MaterialClass::Metal, DamageType::Dent, true);
  m.set(MaterialClass::Metal, DamageType::Scratch, true);
  m.set(MaterialClass::Metal, DamageType::Crack, true);
  m.set(MaterialClass::Glass, DamageType::GlassShatter, true);
  m.set(MaterialClass::Lamp, DamageType::BrokenLamp, true);
  return m;
}

bool CompatibilityMatrix::allows(MaterialClass material, DamageType type) const {
  return allowed_[static_cast<std::size_t>(material)][static_cast<std::size_t>(type)];
}

void CompatibilityMatrix::set(MaterialClass material, DamageType type, bool allowed) {
  if (type == DamageType::None) return;
  allowed_[static_cast<std::size_t>(material)][static_cast<std::size_t>(type)] = allowed;
}

std::vector<DamageType> CompatibilityMatrix::types_for(MaterialClass material) const {
  std::vector<DamageType> out;
  for (auto t : kDamageTypes)
    if (allows(material, t)) out.push_back(t);
  return out;
}

void ParameterRanges::validate() const {
  auto check = [](const Range& r, const char* name, bool positive) {
    if (!(r.min <= r.max) || !std::isfinite(r.min) || !std::isfinite(r.max))
      throw Error(ErrorKind::ConfigInvalid, std::string("range ") + name + ": min must be <= max");
    if (positive && !(r.min > 0))
      throw Error(ErrorKind::ConfigInvalid, std::string("range ") + name + " must be positive");
  };
  check(dent.area, "dent.area", true);
  check(dent.depth, "dent.depth", false);
  check(scratch.area, "scratch.area", true);
  check(crack.area, "crack.area", true);
  check(crack.line_width, "crack.line_width", true);
  check(shatter.area, "glass_shatter.area", true);
  check(shatter.ring_scale, "glass_shatter.ring_scale", true);
  check(shatter.thickness, "glass_shatter.thickness", true);
  check(shatter.line_count, "glass_shatter.line_count", true);
  check(lamp.area, "broken_lamp.area", true);
  check(lamp.thickness, "broken_lamp.thickness", true);
  check(lamp.chunk_radius, "broken_lamp.chunk_radius", true);
  if (shatter.thickness.max >= 1.0)
    throw Error(ErrorKind::ConfigInvalid, "glass_shatter.thickness must stay below 1");
  if (shatter.line_count.min < 1)
    throw Error(ErrorKind::ConfigInvalid, "glass_shatter.line_count must be >= 1");
}

NoiseDefaults NoiseDefaults::defaults() {
  NoiseDefaults d;
  auto& dent = d[DamageType::Dent];
  dent.perlin = {4.0, 0.04, 0.0, 2};
  dent.voronoi_color = {5.0, 0.4, 0.0, 1};

  auto& scratch = d[DamageType::Scratch];
  scratch.voronoi_color = {4.0, 0.08, 0.0, 1};
  scratch.wave = {40.0, 1.0, 0.4, 1};

  auto& crack = d[DamageType::Crack];
  crack.voronoi_color = {12.0, 0.02, 0.0, 1};

  auto& shatter = d[DamageType::GlassShatter];
  shatter.voronoi_color = {10.0, 0.015, 0.0, 1};
  shatter.jitter = 0.6;

  auto& lamp = d[DamageType::BrokenLamp];
  lamp.voronoi_distance = {14.0, 1.0, 0.0, 1};
  lamp.perlin = {20.0, 0.01, 0.0, 1};
  return d;
}

// ---------------------------------------------------------------------------
// Field generators

namespace {

void require_type(const DamageSpec& spec, DamageType expected) {
  if (spec.type != expected)
    throw Error(ErrorKind::WrongType, "expected " + std::string(to_string(expected)) + " spec, got " +
                                          std::string(to_string(spec.type)));
}

constexpr std::uint64_t kCrackStreamA = 0xa1;
constexpr std::uint64_t kCrackStreamB = 0xb2;

}  // namespace

std::pair<Vec3, Vec3> tangent_basis(const Vec3& normal) {
  Vec3 n = normalize(normal);
  if (length(n) == 0) n = {0, 0, 1};
  const Vec3 u = any_orthogonal(n);
  return {u, cross(n, u)};
}

double footprint_radius(const DamageSpec& spec) {
  switch (spec.type) {
    case DamageType::Dent: return spec.area + spec.noise.perlin.amplitude;
    case DamageType::Scratch: return spec.area + voronoi_color_bound(spec.noise.voronoi_color);
    case DamageType::Crack:
    case DamageType::GlassShatter:
    case DamageType::BrokenLamp: return spec.area;
    case DamageType::None: break;
  }
  return 0.0;
}

double dent_radius(const Vec3& x, const DamageSpec& spec, const NoiseContext& ctx) {
  return distance(x, spec.center) + perlin(ctx, x, spec.noise.perlin);
}

double dent_length(double r, double area, double depth) {
  if (r >= area) return 0.0;
  const double rr = std::max(r, 0.0);
  return depth * (1.0 + std::cos(kPi * rr / area)) / 2.0;
}

LabeledMesh dent_displace(const LabeledMesh& mesh, const DamageSpec& spec, const NoiseContext& ctx) {
  require_type(spec, DamageType::Dent);
  if (!(spec.area > 0)) throw Error(ErrorKind::OutOfRange, "dent area must be positive");

  LabeledMesh out = mesh;
  const double reach = footprint_radius(spec);
  std::vector<char> moved(mesh.vertices.size(), 0);
  bool any = false;
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Vec3& x = mesh.vertices[i];
    if (distance(x, spec.center) >= reach) continue;
    const double l = dent_length(dent_radius(x, spec, ctx), spec.area, spec.depth);
    if (l == 0.0) continue;
    const Vec3 direction = mesh.normals[i] + voronoi_color(ctx, x, spec.noise.voronoi_color);
    out.vertices[i] = x - direction * l;
    moved[i] = 1;
    any = true;
  }
  if (!any) return out;

  // Only vertices sharing a triangle with a moved vertex need new normals.
  std::vector<char> touched(mesh.vertices.size(), 0);
  for (const auto& t : mesh.triangles)
    if (moved[t[0]] || moved[t[1]] || moved[t[2]])
      for (auto idx : t) touched[idx] = 1;
  std::vector<Vec3> sums(mesh.vertices.size());
  for (const auto& t : out.triangles) {
    if (!touched[t[0]] && !touched[t[1]] && !touched[t[2]]) continue;
    const auto& v = out.vertices;
    const Vec3 n = cross(v[t[1]] - v[t[0]], v[t[2]] - v[t[0]]);
    for (auto idx : t) sums[idx] += n;
  }
  for (std::size_t i = 0; i < sums.size(); ++i) {
    if (!touched[i]) continue;
    const double l = length(sums[i]);
    out.normals[i] = l > 0 ? sums[i] / l : mesh.normals[i];
  }
  out.update_bounding_radius();
  return out;
}

double scratch_factor(const Vec3& x, const DamageSpec& spec, const NoiseContext& ctx) {
  require_type(spec, DamageType::Scratch);
  if (distance(x, spec.center) > footprint_radius(spec)) return 0.0;
  const Vec3 offset = x - spec.center + voronoi_color(ctx, x, spec.noise.voronoi_color);
  if (length(offset) > spec.area) return 0.0;
  return wave(ctx, x, spec.noise.wave);
}

Vec3 crack_direction(const DamageSpec& spec, const NoiseContext& ctx) {
  const auto [u, v] = tangent_basis(spec.normal);
  const double phi = kPi * static_cast<double>(mix64(hash_combine(ctx.seed(), hash_tag("crack_dir"))) >> 11) * 0x1.0p-53;
  return u * std::cos(phi) + v * std::sin(phi);
}

double crack_factor(const Vec3& x, const DamageSpec& spec, const NoiseContext& ctx) {
  require_type(spec, DamageType::Crack);
  const double region = std::clamp((spec.area - distance(spec.center, x)) / spec.area, 0.0, 1.0);
  if (region == 0.0) return 0.0;
  // Tangent-plane coordinates rotated so the line x1 = x2 runs along crack_direction.
  const Vec3 along = crack_direction(spec, ctx);
  const Vec3 across = cross(normalize(spec.normal), along);
  const Vec3 local = x - spec.center;
  const double a = dot(local, along) / std::sqrt(2.0), b = dot(local, across) / std::sqrt(2.0);
  const double x1 = a - b + voronoi_color(ctx.child(kCrackStreamA), x, spec.noise.voronoi_color).x;
  const double x2 = a + b + voronoi_color(ctx.child(kCrackStreamB), x, spec.noise.voronoi_color).x;
  const double line = std::max(1.0 - std::abs(x1 - x2) / spec.line_width, 0.0);
  return region * line;
}

double shatter_factor(const Vec3& x, const DamageSpec& spec, const NoiseContext& ctx) {
  require_type(spec, DamageType::GlassShatter);
  const double r = distance(x, spec.center);
  if (r > spec.area) return 0.0;

  const Vec3 warped = x - spec.center + voronoi_color(ctx, x, spec.noise.voronoi_color);
  if (std::abs(std::sin(spec.ring_scale * length(warped))) < spec.thickness) return 1.0;

  const auto [u, v] = tangent_basis(spec.normal);
  const double angle = radial_gradient(x, spec.center, u, v);
  const double periodic = noisy_periodic(ctx, angle, spec.line_count, spec.noise.jitter);
  return periodic * r < spec.thickness ? 1.0 : 0.0;
}

Vec3 lamp_chunk_center(const DamageSpec& spec, const NoiseContext& ctx) {
  const std::uint64_t h = hash_combine(ctx.seed(), hash_tag("lamp_chunk"));
  const double phi = 2.0 * kPi * static_cast<double>(mix64(h ^ 1) >> 11) * 0x1.0p-53;
  const double rho = 0.5 * std::min(spec.chunk_radius, spec.area) *
                     static_cast<double>(mix64(h ^ 2) >> 11) * 0x1.0p-53;
  const auto [u, v] = tangent_basis(spec.normal);
  return spec.center + (u * std::cos(phi) + v * std::sin(phi)) * rho;
}

LampFactors broken_lamp_factors(const Vec3& x, const DamageSpec& spec, const NoiseContext& ctx) {
  require_type(spec, DamageType::BrokenLamp);
  LampFactors f;
  if (distance(x, spec.center) > spec.area) return f;
  f.fracture = voronoi_distance(ctx, x, spec.noise.voronoi_distance) < spec.thickness ? 1.0 : 0.0;
  const double d = distance(x, lamp_chunk_center(spec, ctx)) + perlin(ctx, x, spec.noise.perlin);
  f.chunk = d < spec.chunk_radius ? 1.0 : 0.0;
  return f;
}

bool damage_indicator(const Vec3& x, const DamageSpec& spec, const NoiseContext& ctx) {
  if (distance(x, spec.center) > footprint_radius(spec)) return false;
  switch (spec.type) {
    case DamageType::Dent: return dent_radius(x, spec, ctx) < spec.area;
    case DamageType::Scratch: return scratch_factor(x, spec, ctx) >= 0.5;
    case DamageType::Crack: return crack_factor(x, spec, ctx) >= 0.5;
    case DamageType::GlassShatter: return shatter_factor(x, spec, ctx) == 1.0;
    case DamageType::BrokenLamp: {
      const auto f = broken_lamp_factors(x, spec, ctx);
      return f.chunk == 1.0 || f.fracture == 1.0;
    }
    case DamageType::None: break;
  }
  return false;
}

DamageType damage_label(const Vec3& x, std::span<const DamageSpec> applied,
                        std::span<const NoiseContext> contexts) {
  if (applied.size() != contexts.size())
    throw Error(ErrorKind::OutOfRange, "one noise context per damage required");
  for (std::size_t i = 0; i < applied.size(); ++i)
    if (damage_indicator(x, applied[i], contexts[i])) return applied[i].type;
  return DamageType::None;
}

// ---------------------------------------------------------------------------
// Placement

DamageSpec sample_damage_parameters(DamageType type, const ParameterRanges& ranges,
                                    const NoiseDefaults& noise, Rng& rng) {
  DamageSpec spec;
  spec.type = type;
  spec.noise = noise[type];
  auto draw = [&](const Range& r) { return rng.uniform(r.min, r.max); };
  switch (type) {
    case DamageType::Dent:
      spec.area = draw(ranges.dent.area);
      spec.depth = draw(ranges.dent.depth);
      break;
    case DamageType::Scratch:
      spec.area = draw(ranges.scratch.area);
      break;
    case DamageType::Crack:
      spec.area = draw(ranges.crack.area);
      spec.line_width = draw(ranges.crack.line_width);
      break;
    case DamageType::GlassShatter:
      spec.area = draw(ranges.shatter.area);
      spec.ring_scale = draw(ranges.shatter.ring_scale);
      spec.thickness = draw(ranges.shatter.thickness);
      spec.line_count = static_cast<int>(rng.integer(std::llround(ranges.shatter.line_count.min),
                                                     std::llround(ranges.shatter.line_count.max)));
      break;
    case DamageType::BrokenLamp:
      spec.area = draw(ranges.lamp.area);
      spec.thickness = draw(ranges.lamp.thickness);
      spec.chunk_radius = draw(ranges.lamp.chunk_radius);
      break;
    case DamageType::None:
      throw Error(ErrorKind::WrongType, "cannot sample parameters for 'none'");
  }
  spec.seed = rng.next_u64();
  return spec;
}

DamagePlan sample_damage_plan(const LabeledMesh& mesh, const PartRegistry& registry,
                              const CompatibilityMatrix& compat, const ParameterRanges& ranges,
                              const NoiseDefaults& noise, Rng& rng) {
  std::array<std::vector<int>, 6> parts_by_type;
  bool any = false;
  for (int part : mesh.part_ids()) {
    if (mesh.part_vertices(part).empty()) continue;
    for (auto t : kDamageTypes)
      if (compat.allows(registry.material(part), t)) {
        parts_by_type[static_cast<std::size_t>(t)].push_back(part);
        any = true;
      }
  }
  if (!any) throw Error(ErrorKind::NoCompatiblePart, "no part of the mesh accepts any damage");

  DamageType type;
  do {
    type = kDamageTypes[rng.index(kDamageTypes.size())];
  } while (parts_by_type[static_cast<std::size_t>(type)].empty());

  const auto& parts = parts_by_type[static_cast<std::size_t>(type)];
  const int part = parts[rng.index(parts.size())];
  const VertexSample vs = sample_part_vertex(mesh, part, rng);

  DamagePlan plan;
  plan.primary = sample_damage_parameters(type, ranges, noise, rng);
  plan.primary.center = vs.position;
  plan.primary.normal = mesh.normals[vs.index];
  plan.part_id = part;
  plan.vertex = vs.index;
  return plan;
}

std::vector<DamageSpec> secondary_damage_chain(std::span<const DamageCandidate> candidates,
                                               const LabeledMesh& mesh, const PartRegistry& registry,
                                               const CompatibilityMatrix& compat,
                                               const ParameterRanges& ranges,
                                               const NoiseDefaults& noise, Rng& rng,
                                               std::vector<int>* parts) {
  std::vector<DamageSpec> out;
  if (candidates.empty()) return out;
  double p = kFirstSecondaryProbability;
  while (rng.bernoulli(p)) {
    const DamageCandidate& c = candidates[rng.index(candidates.size())];
    const auto types = compat.types_for(registry.material(c.part_id));
    if (types.empty()) throw Error(ErrorKind::NoCompatiblePart, "candidate on a part that accepts no damage");
    const DamageType type = types[rng.index(types.size())];
    DamageSpec spec = sample_damage_parameters(type, ranges, noise, rng);
    spec.center = mesh.vertices[c.vertex];
    spec.normal = mesh.normals[c.vertex];
    out.push_back(spec);
    if (parts) parts->push_back(c.part_id);
    p = kFurtherSecondaryProbability;
  }
  return out;
}

}  // namespace carsynth
