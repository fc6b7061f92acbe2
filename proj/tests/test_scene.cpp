#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <map>

#include "carsynth/procedural.hpp"
#include "carsynth/render.hpp"
#include "carsynth/scene.hpp"

using namespace carsynth;
namespace fs = std::filesystem;

namespace {

RasterPoint raster(const Camera& c, const Vec3& p) { return std::get<RasterPoint>(project_to_raster(c, p)); }

const LabeledMesh& coarse_car() {
  static const LabeledMesh car = make_procedural_car(CarStyle::Hatchback, PartRegistry::defaults(), 0.1);
  return car;
}

}  // namespace

TEST(Palette, DefaultsAndJson) {
  const auto p = PaintPalette::defaults();
  EXPECT_GE(p.entries().size(), 4u);
  const auto back = PaintPalette::from_json_text(p.to_json_text());
  ASSERT_EQ(back.entries().size(), p.entries().size());
  for (std::size_t i = 0; i < p.entries().size(); ++i) {
    EXPECT_EQ(back.entries()[i].name, p.entries()[i].name);
    EXPECT_EQ(back.entries()[i].color, p.entries()[i].color);
    EXPECT_EQ(back.entries()[i].roughness, p.entries()[i].roughness);
  }
  const auto shipped = PaintPalette::load(fs::path(CARSYNTH_SOURCE_DIR) / "data" / "palette.json");
  EXPECT_EQ(shipped.entries().size(), p.entries().size());
}

TEST(Palette, RejectsInvalid) {
  EXPECT_THROW(PaintPalette(std::vector<PaintEntry>{}), Error);
  EXPECT_THROW(PaintPalette({{"hot", {1.5, 0, 0}, 0, 0.3}}), Error);
  EXPECT_THROW(PaintPalette({{"x", {0.5, 0, 0}, -0.1, 0.3}}), Error);
  EXPECT_THROW(PaintPalette::from_json_text(R"({"colors":[{"name":"a","color":[1,0]}]})"), Error);
  EXPECT_THROW(PaintPalette::from_json_text("not json"), Error);
}

TEST(CameraRanges, Validation) {
  CameraRanges r;
  EXPECT_NO_THROW(r.validate());
  r.jitter_deg = {-30, 30};
  EXPECT_THROW(r.validate(), Error);
  CameraRanges d;
  d.distance = {0, 1};
  EXPECT_THROW(d.validate(), Error);
  CameraRanges y;
  y.yaw_deg = {10, -10};
  EXPECT_THROW(y.validate(), Error);
}

TEST(Candidates, FacingAwayIsEmpty) {
  const auto reg = PartRegistry::defaults();
  const auto& car = coarse_car();
  const Camera cam = aim_camera({10, 0, 0}, {20, 0, 0}, 50, {256, 256});
  EXPECT_TRUE(visible_damage_candidates(car, reg, cam, CompatibilityMatrix::defaults(), 100).empty());
}

TEST(Candidates, SingleGlassVertex) {
  const auto reg = PartRegistry::defaults();
  const int glass = *reg.find("front_windshield");
  // One glass triangle with only its first vertex in frame.
  const auto mesh = LabeledMesh::build({{0, 0, 0}, {0, 50, 0}, {0, 0, 50}}, {{0, 1, 2}}, {glass}, reg);
  const Camera cam = aim_camera({3, 0, 0}, {0, 0, 0}, 50, {256, 256});
  const auto c = visible_damage_candidates(mesh, reg, cam, CompatibilityMatrix::defaults(), 10);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].vertex, 0u);
  EXPECT_EQ(c[0].part_id, glass);
  EXPECT_TRUE(visible_damage_candidates(mesh, reg, cam, CompatibilityMatrix::defaults(), 2.9).empty());
}

TEST(Candidates, MonotoneInDistanceAndSatisfyPredicate) {
  const auto reg = PartRegistry::defaults();
  const auto& car = coarse_car();
  const auto compat = CompatibilityMatrix::defaults();
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const Vec3 pos{rng.uniform(-6, 6), rng.uniform(-6, 6), rng.uniform(0, 3)};
    const Camera cam = aim_camera(pos, {rng.uniform(-1, 1), rng.uniform(-0.5, 0.5), 0}, 50, {256, 256});
    const auto near = visible_damage_candidates(car, reg, cam, compat, 2.0 + length(pos) - 2.5);
    const auto far = visible_damage_candidates(car, reg, cam, compat, 4.0 + length(pos) - 2.5);
    EXPECT_LE(near.size(), far.size());
    for (const auto& c : near) EXPECT_NE(std::find(far.begin(), far.end(), c), far.end());
    for (const auto& c : far) {
      const Vec3& p = car.vertices[c.vertex];
      ASSERT_LE(distance(p, cam.position), 4.0 + length(pos) - 2.5);
      ASSERT_TRUE(in_frame(cam, raster(cam, p)));
      ASSERT_TRUE(compat.carries_any(reg.material(c.part_id)));
      const auto& verts = car.part_vertices(c.part_id);
      ASSERT_TRUE(std::binary_search(verts.begin(), verts.end(), c.vertex));
    }
  }
}

TEST(SampleScene, SinglePoolEntriesAlwaysUsed) {
  const auto reg = PartRegistry::defaults();
  const auto sphere = make_sphere_mesh(1.0, *reg.find("roof"), reg, 0.25);
  const std::vector<Environment> pool{Environment::solid({0.2, 0.3, 0.4})};
  const PaintPalette palette({{"only", {0.5, 0.1, 0.1}, 0.2, 0.4}});
  SceneConfig config;
  for (std::uint64_t s = 0; s < 30; ++s) {
    Rng rng(s);
    const auto scene = sample_scene(sphere, reg, std::nullopt, pool, palette, config, s, rng);
    EXPECT_EQ(scene.paint.name, "only");
    EXPECT_EQ(scene.environment.kind, Environment::Kind::Solid);
    EXPECT_EQ(scene.environment.color, Vec3(0.2, 0.3, 0.4));
    EXPECT_TRUE(scene.damages.empty());
  }
}

TEST(SampleScene, PaletteFrequencies) {
  const auto reg = PartRegistry::defaults();
  const auto sphere = make_sphere_mesh(1.0, *reg.find("roof"), reg, 0.3);
  const PaintPalette palette({{"a", {0.1, 0.1, 0.1}, 0, 0.3},
                              {"b", {0.2, 0.2, 0.2}, 0, 0.3},
                              {"c", {0.3, 0.3, 0.3}, 0, 0.3},
                              {"d", {0.4, 0.4, 0.4}, 0, 0.3}});
  SceneConfig config;
  config.resolution = {64, 64};
  std::map<std::string, int> counts;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    Rng rng(hash_combine(99, i));
    ++counts[sample_scene(sphere, reg, std::nullopt, {}, palette, config, i, rng).paint.name];
  }
  double chi2 = 0;
  for (const auto& [name, c] : counts) {
    EXPECT_NEAR(c / double(n), 0.25, 0.02) << name;
    chi2 += (c - n / 4.0) * (c - n / 4.0) / (n / 4.0);
  }
  EXPECT_EQ(counts.size(), 4u);
  EXPECT_LT(chi2, 11.34);  // 3 dof, p = 0.01
}

TEST(SampleScene, Deterministic) {
  const auto reg = PartRegistry::defaults();
  const auto& car = coarse_car();
  SceneConfig config;
  for (std::uint64_t s = 0; s < 5; ++s) {
    Rng r1(s), r2(s);
    const auto p1 = sample_damage_plan(car, reg, config.compat, config.ranges, config.noise, r1);
    const auto p2 = sample_damage_plan(car, reg, config.compat, config.ranges, config.noise, r2);
    const auto a = sample_scene(car, reg, p1, {}, PaintPalette::defaults(), config, s, r1);
    const auto b = sample_scene(car, reg, p2, {}, PaintPalette::defaults(), config, s, r2);
    EXPECT_EQ(scene_metadata(a), scene_metadata(b));
    EXPECT_EQ(a.mesh.vertices, b.mesh.vertices);
    EXPECT_EQ(a.camera.orientation, b.camera.orientation);
  }
}

TEST(SampleScene, CenteringSecondaryVisibilityAndSeeds) {
  const auto reg = PartRegistry::defaults();
  const auto& car = coarse_car();
  SceneConfig config;
  int visible = 0, with_secondary = 0;
  const int n = 200;
  for (int i = 0; i < n; ++i) {
    const std::uint64_t seed = hash_combine(7, i);
    Rng rng(seed);
    const auto plan = sample_damage_plan(car, reg, config.compat, config.ranges, config.noise, rng);
    const auto scene = sample_scene(car, reg, plan, {}, PaintPalette::defaults(), config, seed, rng);
    ASSERT_NO_THROW(scene.validate());
    const auto rp = raster(scene.aimed_camera, scene.damages[0].center);
    ASSERT_LE(std::hypot(rp.u - 256, rp.v - 256), 0.5);
    EXPECT_EQ(scene.camera.position, scene.aimed_camera.position);
    EXPECT_LE(std::abs(rad_to_deg(scene.jitter1)), 5.0);
    visible += scene.primary_visible;
    with_secondary += scene.damages.size() > 1;
    ASSERT_EQ(scene.damages.size(), scene.contexts.size());
    ASSERT_EQ(scene.damages.size(), scene.damage_parts.size());
    for (std::size_t k = 0; k < scene.damages.size(); ++k) {
      const auto& d = scene.damages[k];
      EXPECT_EQ(d.seed, hash_combine(seed, k));
      EXPECT_TRUE(config.compat.allows(reg.material(scene.damage_parts[k]), d.type));
      if (k == 0) continue;
      EXPECT_LE(distance(d.center, scene.camera.position), config.camera.max_distance_factor * scene.distance + 1e-9);
      EXPECT_TRUE(in_frame(scene.camera, raster(scene.camera, d.center)));
    }
  }
  EXPECT_GT(visible, n * 9 / 10);
  EXPECT_GT(with_secondary, n / 4);
}

TEST(SampleScene, DentPrimaryDisplacesMesh) {
  const auto reg = PartRegistry::defaults();
  const auto& car = coarse_car();
  SceneConfig config;
  CompatibilityMatrix dent_only;
  dent_only.set(MaterialClass::Metal, DamageType::Dent, true);
  Rng rng(5);
  const auto plan = sample_damage_plan(car, reg, dent_only, config.ranges, config.noise, rng);
  ASSERT_EQ(plan.primary.type, DamageType::Dent);
  const auto scene = sample_scene(car, reg, plan, {}, PaintPalette::defaults(), config, 5, rng);
  EXPECT_NE(scene.mesh.vertices[plan.vertex], car.vertices[plan.vertex]);
  EXPECT_EQ(scene.mesh.triangles, car.triangles);
}

TEST(SceneValidate, RejectsFarDamage) {
  auto scene = preview_scene(DamageType::Scratch, 1, {64, 64});
  EXPECT_NO_THROW(scene.validate());
  scene.damages[0].center = {5, 0, 0};
  EXPECT_THROW(scene.validate(), Error);
}

TEST(PreviewScene, EveryTypeCentered) {
  for (auto t : kDamageTypes) {
    const auto scene = preview_scene(t, 3, {128, 128});
    ASSERT_EQ(scene.damages.size(), 1u);
    EXPECT_EQ(scene.damages[0].type, t);
    EXPECT_TRUE(scene.compat.allows(scene.registry.material(scene.damage_parts[0]), t));
    const auto rp = raster(scene.camera, scene.damages[0].center);
    EXPECT_NEAR(rp.u, 64, 1e-9);
    EXPECT_NEAR(rp.v, 64, 1e-9);
  }
}

TEST(Environments, BuiltinSkies) {
  const auto envs = builtin_environments();
  ASSERT_EQ(envs.size(), 4u);
  for (const auto& e : envs) {
    EXPECT_EQ(e.kind, Environment::Kind::ProceduralSky);
    EXPECT_NEAR(length(e.sky.sun_direction), 1.0, 1e-12);
    EXPECT_GT(e.sky.sun_direction.z, 0.0);
  }
  EXPECT_TRUE(scan_environment_dir("/nonexistent_dir_for_test").empty());
}
