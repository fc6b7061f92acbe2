#include <gtest/gtest.h>

#include <array>
#include <map>
#include <queue>

#include "carsynth/damage.hpp"
#include "carsynth/procedural.hpp"

using namespace carsynth;

namespace {

struct Rgb {
  double r, g, b;
  Rgb operator*(double s) const { return {r * s, g * s, b * s}; }
  Rgb operator+(const Rgb& o) const { return {r + o.r, g + o.g, b + o.b}; }
};

DamageSpec silent_spec(DamageType type) {
  DamageSpec s;
  s.type = type;
  s.center = {0.2, -0.1, 0.4};
  s.normal = normalize(Vec3(0.3, 0.2, 1));
  s.noise = DamageNoise::silent();
  s.seed = 77;
  return s;
}

// Number of 4-connected components of `mask` on an n x n grid.
int components(const std::vector<char>& mask, int n) {
  std::vector<char> seen(mask.size(), 0);
  int count = 0;
  for (int start = 0; start < n * n; ++start) {
    if (!mask[start] || seen[start]) continue;
    ++count;
    std::queue<int> q;
    q.push(start);
    seen[start] = 1;
    while (!q.empty()) {
      const int i = q.front();
      q.pop();
      const int x = i % n, y = i / n;
      const int nb[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
      for (const auto& p : nb) {
        if (p[0] < 0 || p[1] < 0 || p[0] >= n || p[1] >= n) continue;
        const int j = p[1] * n + p[0];
        if (mask[j] && !seen[j]) {
          seen[j] = 1;
          q.push(j);
        }
      }
    }
  }
  return count;
}

// Runs of true values on a circular sequence.
int circular_runs(const std::vector<bool>& v) {
  int runs = 0;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] && !v[(i + v.size() - 1) % v.size()]) ++runs;
  return runs;
}

// One triangle per part: hood (metal), front_windshield (glass),
// left_head_light (lamp), wheel (other).
LabeledMesh four_class_mesh(const PartRegistry& reg) {
  std::vector<Vec3> v;
  std::vector<Triangle> t;
  std::vector<int> parts;
  const char* names[] = {"hood", "front_windshield", "left_head_light", "wheel"};
  for (std::uint32_t i = 0; i < 4; ++i) {
    v.push_back({double(i), 0, 0});
    v.push_back({double(i) + 1, 0, 0});
    v.push_back({double(i), 1, 0});
    t.push_back({3 * i, 3 * i + 1, 3 * i + 2});
    parts.push_back(*reg.find(names[i]));
  }
  return LabeledMesh::build(v, t, parts, reg);
}

}  // namespace

TEST(Mix, EndpointsAndLinearity) {
  const Rgb black{0, 0, 0}, white{1, 1, 1};
  EXPECT_EQ(mix(1.0, black, white).r, 0.0);
  EXPECT_EQ(mix(0.0, black, white).r, 1.0);
  const Rgb mid = mix(0.5, black, white);
  EXPECT_EQ(mid.r, 0.5);
  EXPECT_EQ(mid.g, 0.5);
  EXPECT_EQ(mix(0.25, 2.0, 6.0), 5.0);
  EXPECT_THROW(mix(1.5, black, white), Error);
  EXPECT_THROW(mix(-0.1, 1.0, 2.0), Error);
}

TEST(Dent, ProfileValues) {
  EXPECT_NEAR(dent_length(0, 0.4, 0.1), 0.1, 1e-15);
  EXPECT_NEAR(dent_length(0.2, 0.4, 0.1), 0.05, 1e-15);
  EXPECT_EQ(dent_length(0.4, 0.4, 0.1), 0.0);
  EXPECT_EQ(dent_length(3.0, 0.4, 0.1), 0.0);
  // Monotone from the center to the rim.
  for (int i = 1; i < 100; ++i) EXPECT_LE(dent_length(i * 0.004, 0.4, 0.1), dent_length((i - 1) * 0.004, 0.4, 0.1));
}

TEST(Dent, SilentDisplacementOnSphere) {
  const auto reg = PartRegistry::defaults();
  const auto sphere = make_sphere_mesh(1.0, *reg.find("hood"), reg, 0.03);
  const std::uint32_t ci = 123;
  DamageSpec spec = silent_spec(DamageType::Dent);
  spec.center = sphere.vertices[ci];
  spec.normal = sphere.normals[ci];
  spec.area = 0.3;
  spec.depth = 0.08;
  const auto ctx = spec.context();
  const auto out = dent_displace(sphere, spec, ctx);
  EXPECT_NEAR(distance(out.vertices[ci], spec.center - spec.normal * 0.08), 0, 1e-9);
  int inside = 0;
  for (std::size_t i = 0; i < sphere.vertices.size(); ++i) {
    const Vec3& x = sphere.vertices[i];
    const double r = distance(x, spec.center);
    if (r >= spec.area) {
      ASSERT_EQ(out.vertices[i], x);
      continue;
    }
    ++inside;
    const double expect = 0.08 * (1 + std::cos(kPi * r / 0.3)) / 2;
    ASSERT_NEAR(distance(out.vertices[i], x - sphere.normals[i] * expect), 0, 1e-9);
  }
  EXPECT_GT(inside, 50);
  EXPECT_EQ(out.triangles, sphere.triangles);
  EXPECT_EQ(out.vertices.size(), sphere.vertices.size());
  EXPECT_EQ(out.submeshes.size(), sphere.submeshes.size());
  for (const auto& n : out.normals) EXPECT_NEAR(length(n), 1.0, 1e-6);
}

TEST(Dent, NoisyStaysInsideFootprintAndIsDeterministic) {
  const auto reg = PartRegistry::defaults();
  const auto sphere = make_sphere_mesh(1.0, *reg.find("roof"), reg, 0.04);
  Rng rng(3);
  DamageSpec spec = sample_damage_parameters(DamageType::Dent, {}, NoiseDefaults::defaults(), rng);
  spec.center = sphere.vertices[40];
  spec.normal = sphere.normals[40];
  const auto a = dent_displace(sphere, spec, spec.context());
  const auto b = dent_displace(sphere, spec, spec.context());
  EXPECT_EQ(a.vertices, b.vertices);
  EXPECT_EQ(a.normals, b.normals);
  for (std::size_t i = 0; i < sphere.vertices.size(); ++i)
    if (distance(sphere.vertices[i], spec.center) > footprint_radius(spec))
      ASSERT_EQ(a.vertices[i], sphere.vertices[i]);
}

TEST(Dent, WrongType) {
  const auto reg = PartRegistry::defaults();
  const auto sphere = make_sphere_mesh(1.0, 1, reg, 0.2);
  const auto spec = silent_spec(DamageType::Scratch);
  try {
    dent_displace(sphere, spec, spec.context());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::WrongType);
  }
  EXPECT_THROW(scratch_factor({}, silent_spec(DamageType::Crack), NoiseContext(1)), Error);
  EXPECT_THROW(crack_factor({}, silent_spec(DamageType::Dent), NoiseContext(1)), Error);
  EXPECT_THROW(shatter_factor({}, silent_spec(DamageType::Dent), NoiseContext(1)), Error);
  EXPECT_THROW(broken_lamp_factors({}, silent_spec(DamageType::Dent), NoiseContext(1)), Error);
}

TEST(Scratch, SilentIndicatorAndCenterValue) {
  DamageSpec spec = silent_spec(DamageType::Scratch);
  spec.area = 0.3;
  const auto ctx = spec.context();
  EXPECT_EQ(scratch_factor(spec.center + Vec3(0.31, 0, 0), spec, ctx), 0.0);
  EXPECT_EQ(scratch_factor(spec.center + Vec3(0, 0, -2), spec, ctx), 0.0);
  EXPECT_EQ(scratch_factor(spec.center, spec, ctx), wave(ctx, spec.center, spec.noise.wave));
}

TEST(Scratch, AtLeastThreeBandsOnPlane) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    DamageSpec spec = silent_spec(DamageType::Scratch);
    spec.seed = seed;
    spec.area = 0.3;
    spec.noise.wave = {20.0, 1.0, 0.0, 1};
    const auto ctx = spec.context();
    // Plane through c containing the wave axis.
    const Vec3 e1 = ctx.wave_axis(), e2 = any_orthogonal(e1);
    const int n = 512;
    std::vector<char> mask(n * n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const double s = -0.3 + 0.6 * (i + 0.5) / n, t = -0.3 + 0.6 * (j + 0.5) / n;
        mask[j * n + i] = scratch_factor(spec.center + e1 * s + e2 * t, spec, ctx) > 0.5;
      }
    EXPECT_GE(components(mask, n), 3) << "seed " << seed;
  }
}

TEST(Scratch, RangeWithDefaultNoise) {
  Rng rng(11);
  const auto noise = NoiseDefaults::defaults();
  for (int k = 0; k < 10; ++k) {
    DamageSpec spec = sample_damage_parameters(DamageType::Scratch, {}, noise, rng);
    const auto ctx = spec.context();
    for (int i = 0; i < 2000; ++i) {
      const Vec3 x{rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6)};
      const double f = scratch_factor(x, spec, ctx);
      ASSERT_GE(f, 0.0);
      ASSERT_LE(f, 1.0);
    }
  }
}

TEST(Crack, SilentLineAndRegion) {
  DamageSpec spec = silent_spec(DamageType::Crack);
  spec.area = 0.3;
  spec.line_width = 0.02;
  const auto ctx = spec.context();
  EXPECT_DOUBLE_EQ(crack_factor(spec.center, spec, ctx), 1.0);
  const Vec3 along = crack_direction(spec, ctx);
  const Vec3 across = normalize(cross(spec.normal, along));
  EXPECT_NEAR(dot(along, spec.normal), 0.0, 1e-12);
  EXPECT_NEAR(crack_factor(spec.center + along * 0.15, spec, ctx), 0.5, 1e-12);
  // |x1 - x2| = sqrt(2) * offset across the line.
  EXPECT_EQ(crack_factor(spec.center + across * (0.02 / std::sqrt(2.0)), spec, ctx), 0.0);
  EXPECT_EQ(crack_factor(spec.center + across * 0.05, spec, ctx), 0.0);
  const double half = 0.01 / std::sqrt(2.0);
  EXPECT_NEAR(crack_factor(spec.center + across * half, spec, ctx), 0.5 * (1 - half / 0.3), 1e-9);
  EXPECT_EQ(crack_factor(spec.center + along * 0.3, spec, ctx), 0.0);
  EXPECT_EQ(crack_factor(spec.center + along * 0.45, spec, ctx), 0.0);
}

TEST(Crack, DirectionVariesWithSeed) {
  DamageSpec spec = silent_spec(DamageType::Crack);
  double min_dot = 1;
  for (std::uint64_t s = 0; s < 20; ++s) {
    spec.seed = s;
    const Vec3 d = crack_direction(spec, spec.context());
    EXPECT_NEAR(length(d), 1.0, 1e-12);
    min_dot = std::min(min_dot, std::abs(dot(d, crack_direction(silent_spec(DamageType::Crack),
                                                                silent_spec(DamageType::Crack).context()))));
  }
  EXPECT_LT(min_dot, 0.9);
}

TEST(Crack, RangeWithDefaultNoise) {
  Rng rng(12);
  const auto noise = NoiseDefaults::defaults();
  for (int k = 0; k < 10; ++k) {
    DamageSpec spec = sample_damage_parameters(DamageType::Crack, {}, noise, rng);
    const auto ctx = spec.context();
    for (int i = 0; i < 2000; ++i) {
      const Vec3 x{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
      const double f = crack_factor(x, spec, ctx);
      ASSERT_GE(f, 0.0);
      ASSERT_LE(f, 1.0);
    }
  }
}

TEST(Shatter, RingZeroAndImpactPoint) {
  DamageSpec spec = silent_spec(DamageType::GlassShatter);
  spec.area = 1.0;
  spec.ring_scale = 40;
  spec.thickness = 0.1;
  const auto ctx = spec.context();
  const auto [u, v] = tangent_basis(spec.normal);
  EXPECT_EQ(shatter_factor(spec.center, spec, ctx), 1.0);
  EXPECT_EQ(shatter_factor(spec.center + u * (kPi / 40), spec, ctx), 1.0);
  EXPECT_EQ(shatter_factor(spec.center + v * (3 * kPi / 40), spec, ctx), 1.0);
  EXPECT_EQ(shatter_factor(spec.center + u * 1.01, spec, ctx), 0.0);
}

TEST(Shatter, AngularSweepCountsLines) {
  for (int lines : {4, 6, 9, 12}) {
    DamageSpec spec = silent_spec(DamageType::GlassShatter);
    spec.area = 1.0;
    spec.ring_scale = 40;
    spec.thickness = 0.1;
    spec.line_count = lines;
    const auto ctx = spec.context();
    const auto [u, v] = tangent_basis(spec.normal);
    // sin(40 r) = 1 keeps the ring test off the sweep circle.
    const double r = (kPi / 2 + 6 * kPi) / 40;
    std::vector<bool> hits(10000);
    for (int i = 0; i < 10000; ++i) {
      const double a = 2 * kPi * i / 10000.0;
      hits[i] = shatter_factor(spec.center + (u * std::cos(a) + v * std::sin(a)) * r, spec, ctx) == 1.0;
    }
    EXPECT_EQ(circular_runs(hits), lines);
  }
}

TEST(Shatter, BinaryWithDefaultNoise) {
  Rng rng(13);
  const auto noise = NoiseDefaults::defaults();
  for (int k = 0; k < 5; ++k) {
    DamageSpec spec = sample_damage_parameters(DamageType::GlassShatter, {}, noise, rng);
    const auto ctx = spec.context();
    for (int i = 0; i < 2000; ++i) {
      const Vec3 x{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
      const double f = shatter_factor(x, spec, ctx);
      ASSERT_TRUE(f == 0.0 || f == 1.0);
    }
  }
}

TEST(Lamp, FeaturePointFractureAndChunk) {
  DamageSpec spec = silent_spec(DamageType::BrokenLamp);
  spec.area = 0.3;
  spec.thickness = 0.1;
  spec.chunk_radius = 0.05;
  const auto ctx = spec.context();
  const Vec3 f =
      voronoi_feature_point(ctx, NoiseGenerator::VoronoiDistance, 2, -1, 4) / spec.noise.voronoi_distance.scale;
  spec.center = f;
  EXPECT_EQ(broken_lamp_factors(f, spec, ctx).fracture, 1.0);

  const Vec3 cc = lamp_chunk_center(spec, ctx);
  EXPECT_LE(distance(cc, spec.center), 0.5 * spec.chunk_radius + 1e-12);
  EXPECT_EQ(broken_lamp_factors(cc, spec, ctx).chunk, 1.0);
  const auto [u, v] = tangent_basis(spec.normal);
  EXPECT_EQ(broken_lamp_factors(cc + u * 0.0501, spec, ctx).chunk, 0.0);
  EXPECT_EQ(broken_lamp_factors(cc + v * 0.06, spec, ctx).chunk, 0.0);
  const auto far = broken_lamp_factors(spec.center + u * 0.31, spec, ctx);
  EXPECT_EQ(far.chunk + far.fracture, 0.0);
}

TEST(Footprint, IndicatorsVanishOutside) {
  Rng rng(21);
  const auto noise = NoiseDefaults::defaults();
  for (auto type : kDamageTypes) {
    DamageSpec spec = sample_damage_parameters(type, {}, noise, rng);
    spec.center = {0.1, 0.2, 0.3};
    spec.normal = normalize(Vec3(1, 1, 1));
    const auto ctx = spec.context();
    const double fr = footprint_radius(spec);
    ASSERT_GE(fr, spec.area);
    int outside = 0;
    for (int i = 0; i < 10000; ++i) {
      const Vec3 x = spec.center + Vec3(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)) * fr;
      if (distance(x, spec.center) <= fr) continue;
      ++outside;
      ASSERT_FALSE(damage_indicator(x, spec, ctx)) << to_string(type);
    }
    EXPECT_GT(outside, 8000);
  }
}

TEST(Label, EarliestSpecWins) {
  EXPECT_EQ(damage_label({0, 0, 0}, {}, {}), DamageType::None);

  DamageSpec dent = silent_spec(DamageType::Dent);
  dent.area = 0.2;
  const std::vector<DamageSpec> only_dent{dent};
  const std::vector<NoiseContext> dctx{dent.context()};
  EXPECT_EQ(damage_label(dent.center + Vec3(0.05, 0, 0), only_dent, dctx), DamageType::Dent);
  EXPECT_EQ(damage_label(dent.center + Vec3(0.25, 0, 0), only_dent, dctx), DamageType::None);

  DamageSpec scratch = silent_spec(DamageType::Scratch);
  scratch.area = 0.3;
  scratch.noise.wave = {20.0, 1.0, 0.0, 1};
  DamageSpec crack = silent_spec(DamageType::Crack);
  crack.area = 0.3;
  const auto sctx = scratch.context(), cctx = crack.context();
  // A point on the crack line where the scratch band is also on.
  const Vec3 along = crack_direction(crack, cctx);
  Vec3 x;
  bool found = false;
  for (int i = 0; i < 2000 && !found; ++i) {
    x = crack.center + along * (-0.1 + 0.2 * i / 2000.0);
    found = damage_indicator(x, scratch, sctx) && damage_indicator(x, crack, cctx);
  }
  ASSERT_TRUE(found);
  EXPECT_EQ(damage_label(x, std::vector<DamageSpec>{scratch, crack}, std::vector<NoiseContext>{sctx, cctx}),
            DamageType::Scratch);
  EXPECT_EQ(damage_label(x, std::vector<DamageSpec>{crack, scratch}, std::vector<NoiseContext>{cctx, sctx}),
            DamageType::Crack);
  EXPECT_THROW(damage_label(x, std::vector<DamageSpec>{crack}, std::vector<NoiseContext>{}), Error);
}

TEST(Compatibility, Defaults) {
  const auto m = CompatibilityMatrix::defaults();
  EXPECT_EQ(m.types_for(MaterialClass::Metal),
            (std::vector<DamageType>{DamageType::Dent, DamageType::Scratch, DamageType::Crack}));
  EXPECT_EQ(m.types_for(MaterialClass::Glass), std::vector<DamageType>{DamageType::GlassShatter});
  EXPECT_EQ(m.types_for(MaterialClass::Lamp), std::vector<DamageType>{DamageType::BrokenLamp});
  EXPECT_FALSE(m.carries_any(MaterialClass::Other));
}

TEST(DamageType, Names) {
  for (auto t : kDamageTypes) {
    EXPECT_EQ(damage_type_from_string(to_string(t)), t);
    EXPECT_EQ(damage_type_from_string(std::to_string(static_cast<int>(t))), t);
  }
  EXPECT_THROW(damage_type_from_string("flat_tire"), Error);
}

TEST(Plan, GlassOnlyMeshGivesShatter) {
  const auto reg = PartRegistry::defaults();
  const auto sphere = make_sphere_mesh(1.0, *reg.find("back_windshield"), reg, 0.2);
  Rng rng(1);
  for (int i = 0; i < 500; ++i) {
    const auto plan = sample_damage_plan(sphere, reg, CompatibilityMatrix::defaults(), {},
                                         NoiseDefaults::defaults(), rng);
    ASSERT_EQ(plan.primary.type, DamageType::GlassShatter);
  }
  const auto wheel = make_sphere_mesh(1.0, *reg.find("wheel"), reg, 0.2);
  try {
    sample_damage_plan(wheel, reg, CompatibilityMatrix::defaults(), {}, NoiseDefaults::defaults(), rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoCompatiblePart);
  }
}

TEST(Plan, UniformTypesAndCompatibleParts) {
  const auto reg = PartRegistry::defaults();
  const auto car = make_procedural_car(CarStyle::Sedan, reg, 0.1);
  const auto compat = CompatibilityMatrix::defaults();
  Rng rng(2024);
  std::map<DamageType, int> counts;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto plan = sample_damage_plan(car, reg, compat, {}, NoiseDefaults::defaults(), rng);
    ++counts[plan.primary.type];
    ASSERT_TRUE(compat.allows(reg.material(plan.part_id), plan.primary.type));
    ASSERT_EQ(plan.primary.center, car.vertices[plan.vertex]);
  }
  double chi2 = 0;
  for (auto t : kDamageTypes) {
    EXPECT_NEAR(counts[t] / double(n), 0.2, 0.015) << to_string(t);
    chi2 += (counts[t] - n / 5.0) * (counts[t] - n / 5.0) / (n / 5.0);
  }
  EXPECT_LT(chi2, 13.28);  // 4 dof, p = 0.01
}

TEST(Plan, PinnedRangesGiveExactValues) {
  ParameterRanges r;
  r.dent = {{0.3, 0.3}, {0.05, 0.05}};
  r.shatter = {{0.5, 0.5}, {33, 33}, {0.07, 0.07}, {7, 7}};
  r.lamp = {{0.2, 0.2}, {0.09, 0.09}, {0.04, 0.04}};
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const auto d = sample_damage_parameters(DamageType::Dent, r, NoiseDefaults::defaults(), rng);
    EXPECT_EQ(d.area, 0.3);
    EXPECT_EQ(d.depth, 0.05);
    const auto s = sample_damage_parameters(DamageType::GlassShatter, r, NoiseDefaults::defaults(), rng);
    EXPECT_EQ(s.area, 0.5);
    EXPECT_EQ(s.ring_scale, 33);
    EXPECT_EQ(s.thickness, 0.07);
    EXPECT_EQ(s.line_count, 7);
    const auto l = sample_damage_parameters(DamageType::BrokenLamp, r, NoiseDefaults::defaults(), rng);
    EXPECT_EQ(l.area, 0.2);
    EXPECT_EQ(l.thickness, 0.09);
    EXPECT_EQ(l.chunk_radius, 0.04);
  }
}

TEST(Plan, SampledParametersWithinRanges) {
  const ParameterRanges r;
  Rng rng(6);
  for (int i = 0; i < 2000; ++i) {
    const auto s = sample_damage_parameters(DamageType::GlassShatter, r, NoiseDefaults::defaults(), rng);
    ASSERT_GE(s.line_count, 4);
    ASSERT_LE(s.line_count, 12);
    ASSERT_GE(s.ring_scale, 20);
    ASSERT_LE(s.ring_scale, 80);
    const auto d = sample_damage_parameters(DamageType::Dent, r, NoiseDefaults::defaults(), rng);
    ASSERT_GE(d.area, 0.1);
    ASSERT_LE(d.depth, 0.15);
  }
}

TEST(Chain, EmptyCandidates) {
  const auto reg = PartRegistry::defaults();
  const auto mesh = four_class_mesh(reg);
  Rng rng(1);
  for (int i = 0; i < 100; ++i)
    EXPECT_TRUE(secondary_damage_chain({}, mesh, reg, CompatibilityMatrix::defaults(), {},
                                       NoiseDefaults::defaults(), rng)
                    .empty());
}

TEST(Chain, GeometricLaw) {
  const auto reg = PartRegistry::defaults();
  const auto mesh = four_class_mesh(reg);
  const std::vector<DamageCandidate> cands{{0, *reg.find("hood")}, {3, *reg.find("front_windshield")}};
  Rng rng(2024);
  const int n = 100000;
  int ge1 = 0, ge2 = 0;
  std::map<std::size_t, int> hist;
  for (int i = 0; i < n; ++i) {
    const auto chain = secondary_damage_chain(cands, mesh, reg, CompatibilityMatrix::defaults(), {},
                                              NoiseDefaults::defaults(), rng);
    ge1 += chain.size() >= 1;
    ge2 += chain.size() >= 2;
    ++hist[chain.size()];
  }
  EXPECT_NEAR(ge1 / double(n), 0.5, 0.01);
  EXPECT_NEAR(ge2 / double(ge1), 0.2, 0.01);
  EXPECT_NEAR(hist[1] / double(n), 0.5 * 0.8, 0.01);
  EXPECT_NEAR(hist[2] / double(n), 0.5 * 0.2 * 0.8, 0.01);
}

TEST(Chain, GlassCandidatesGiveShatter) {
  const auto reg = PartRegistry::defaults();
  const auto mesh = four_class_mesh(reg);
  const std::vector<DamageCandidate> cands{{3, *reg.find("front_windshield")}, {4, *reg.find("front_windshield")}};
  Rng rng(9);
  std::vector<int> parts;
  for (int i = 0; i < 2000; ++i) {
    parts.clear();
    const auto chain = secondary_damage_chain(cands, mesh, reg, CompatibilityMatrix::defaults(), {},
                                              NoiseDefaults::defaults(), rng, &parts);
    ASSERT_EQ(parts.size(), chain.size());
    for (const auto& s : chain) {
      ASSERT_EQ(s.type, DamageType::GlassShatter);
      ASSERT_TRUE(s.center == mesh.vertices[3] || s.center == mesh.vertices[4]);
    }
  }
}

TEST(Chain, MixedCandidatesStayCompatible) {
  const auto reg = PartRegistry::defaults();
  const auto mesh = four_class_mesh(reg);
  const auto compat = CompatibilityMatrix::defaults();
  const std::vector<DamageCandidate> cands{
      {0, *reg.find("hood")}, {3, *reg.find("front_windshield")}, {6, *reg.find("left_head_light")}};
  Rng rng(10);
  std::vector<int> parts;
  std::map<DamageType, int> seen;
  for (int i = 0; i < 5000; ++i) {
    parts.clear();
    const auto chain =
        secondary_damage_chain(cands, mesh, reg, compat, {}, NoiseDefaults::defaults(), rng, &parts);
    for (std::size_t k = 0; k < chain.size(); ++k) {
      ASSERT_TRUE(compat.allows(reg.material(parts[k]), chain[k].type));
      ++seen[chain[k].type];
    }
  }
  EXPECT_EQ(seen.size(), 5u);
}

TEST(Ranges, Validation) {
  ParameterRanges r;
  EXPECT_NO_THROW(r.validate());
  r.dent.area = {0.5, 0.1};
  EXPECT_THROW(r.validate(), Error);
  ParameterRanges z;
  z.crack.area = {0.0, 0.1};
  EXPECT_THROW(z.validate(), Error);
}
