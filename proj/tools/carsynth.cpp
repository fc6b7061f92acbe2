// carsynth command-line front end.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "carsynth/dataset.hpp"
#include "carsynth/error.hpp"
#include "carsynth/image_io.hpp"
#include "carsynth/procedural.hpp"
#include "carsynth/render.hpp"
#include "carsynth/scene.hpp"

namespace fs = std::filesystem;
using namespace carsynth;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitPartial = 2;
constexpr int kExitIo = 3;

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::IoFailure:
    case ErrorKind::MissingMask: return kExitIo;
    default: return kExitConfig;
  }
}

int run_generate(const fs::path& config_path, std::optional<std::size_t> count, std::optional<std::uint64_t> seed,
                 std::optional<int> jobs, const std::string& out_dir, bool quiet) {
  GenerationConfig config = GenerationConfig::load(config_path);
  if (count) config.image_count = *count;
  if (seed) config.base_seed = *seed;
  if (jobs) config.jobs = *jobs;
  if (!out_dir.empty()) config.output_dir = out_dir;

  GenerateOptions options;
  if (!quiet)
    options.progress = [](std::size_t done, std::size_t total) {
      if (done == total || done % 10 == 0) std::fprintf(stderr, "\r%zu/%zu images", done, total);
      if (done == total) std::fprintf(stderr, "\n");
    };
  const DatasetManifest manifest = generate(config, options);
  const std::size_t failed = manifest.failures();
  std::printf("wrote %zu images to %s (%zu failed)\n", manifest.images.size(), config.output_dir.c_str(), failed);
  for (const auto& r : manifest.images)
    if (!r.ok) std::fprintf(stderr, "image %zu failed: %s\n", r.index, r.error.c_str());
  return failed ? kExitPartial : kExitOk;
}

int run_stats(const fs::path& manifest_path, const std::string& emit_dir) {
  const DatasetManifest manifest = DatasetManifest::load(manifest_path);
  const DamageStats stats = compute_stats(manifest);
  std::cout << stats.to_json_text();
  if (!emit_dir.empty()) stats.write_csv(emit_dir, manifest.registry);
  return kExitOk;
}

int run_validate(const fs::path& manifest_path) {
  const DatasetManifest manifest = DatasetManifest::load(manifest_path);
  const ValidationReport report = validate_manifest(manifest);
  for (const auto& v : report.violations) std::printf("image %zu: %s: %s\n", v.index, v.kind.c_str(), v.message.c_str());
  std::printf("%zu images checked, %zu violations\n", report.images_checked, report.violations.size());
  return report.ok() ? kExitOk : kExitPartial;
}

void write_outputs(const RenderOutput& out, const fs::path& dir, const std::string& stem) {
  fs::create_directories(dir);
  write_png_rgb(dir / (stem + ".png"), out.rgb);
  write_png_gray(dir / (stem + "_parts.png"), out.part_map);
  write_png_gray(dir / (stem + "_damage.png"), out.damage_map);
  write_text_file(dir / (stem + ".json"), out.metadata);
}

int run_render_one(const std::string& model, const std::string& labels, const std::string& damage,
                   std::uint64_t seed, const fs::path& out_dir, const std::string& quality, int size) {
  const PartRegistry registry = PartRegistry::defaults();
  LabeledMesh mesh;
  std::string model_id;
  if (labels.empty()) {
    mesh = make_procedural_car(car_style_from_string(model), registry);
    model_id = model;
  } else {
    mesh = load_labeled_mesh(model, labels, registry);
    model_id = fs::path(model).stem().string();
  }
  const DamageType type = damage_type_from_string(damage);

  SceneConfig config;
  config.resolution = {size, size};
  // The primary damage is forced to `type`; secondary damages use the full matrix.
  CompatibilityMatrix only = config.compat;
  for (auto m : {MaterialClass::Metal, MaterialClass::Glass, MaterialClass::Lamp, MaterialClass::Other})
    for (auto t : kDamageTypes)
      if (t != type) only.set(m, t, false);

  Rng rng(seed);
  const DamagePlan plan = sample_damage_plan(mesh, registry, only, config.ranges, config.noise, rng);
  SceneDescription scene = sample_scene(mesh, registry, plan, {}, PaintPalette::defaults(), config, seed, rng);
  scene.model_id = model_id;
  const RenderOutput out = render(scene, render_quality_from_string(quality));
  write_outputs(out, out_dir, "render");
  std::printf("rendered %s on %s to %s\n", std::string(to_string(type)).c_str(),
              registry.at(plan.part_id).name.c_str(), out_dir.c_str());
  return kExitOk;
}

int run_preview(const std::string& damage, std::uint64_t seed, const fs::path& out_png, int size) {
  const DamageType type = damage_type_from_string(damage);
  const SceneDescription scene = preview_scene(type, seed, {size, size});
  const RenderOutput out = render(scene, RenderQuality::Full);
  if (out_png.has_parent_path()) fs::create_directories(out_png.parent_path());
  write_png_rgb(out_png, out.rgb);
  LabelImage mask = out.damage_map;
  for (auto& p : mask.pixels) p = p ? 255 : 0;
  fs::path mask_path = out_png;
  mask_path.replace_filename(out_png.stem().string() + "_mask.png");
  write_png_gray(mask_path, mask);
  std::size_t labelled = 0;
  for (auto p : out.damage_map.pixels) labelled += p != 0;
  std::printf("%s: %zu damage pixels -> %s\n", std::string(to_string(type)).c_str(), labelled, out_png.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Procedural car damage dataset generator"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate", "Generate a dataset from a config file");
  std::string config_path, out_dir;
  std::optional<std::size_t> count;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  bool quiet = false;
  gen->add_option("--config", config_path, "Config file (JSON)")->required();
  gen->add_option("--count", count, "Override image_count");
  gen->add_option("--seed", seed, "Override base_seed");
  gen->add_option("--jobs", jobs, "Worker threads (0 = all cores)");
  gen->add_option("--out", out_dir, "Override output_dir");
  gen->add_flag("--quiet", quiet, "No progress output");

  auto* stats = app.add_subcommand("stats", "Damage statistics of a generated dataset");
  std::string manifest_path, emit_dir;
  stats->add_option("--manifest", manifest_path, "manifest.json of a dataset")->required();
  stats->add_option("--emit-histograms", emit_dir, "Directory for CSV histograms and co-occurrence");

  auto* val = app.add_subcommand("validate", "Check a generated dataset against its invariants");
  val->add_option("--manifest", manifest_path, "manifest.json of a dataset")->required();

  auto* one = app.add_subcommand("render-one", "Render one damaged image of a model");
  std::string model, labels, damage, quality = "full";
  std::uint64_t one_seed = 0;
  std::string one_out;
  int size = 512;
  one->add_option("--model", model, "OBJ file, or a built-in style (sedan, hatchback, suv, coupe)")->required();
  one->add_option("--labels", labels, "Label sidecar for the OBJ (omit for built-in styles)");
  one->add_option("--damage", damage, "Primary damage type")->required();
  one->add_option("--seed", one_seed, "Seed");
  one->add_option("--out", one_out, "Output directory")->required();
  one->add_option("--quality", quality, "preview or full");
  one->add_option("--size", size, "Square resolution in pixels")->check(CLI::Range(16, 4096));

  auto* prev = app.add_subcommand("preview-damage", "Render one damage type on a test sphere");
  std::string prev_type, prev_out;
  std::uint64_t prev_seed = 0;
  int prev_size = 256;
  prev->add_option("--type", prev_type, "Damage type")->required();
  prev->add_option("--seed", prev_seed, "Seed")->required();
  prev->add_option("--out", prev_out, "Output PNG (a _mask.png is written next to it)")->required();
  prev->add_option("--size", prev_size, "Square resolution in pixels")->check(CLI::Range(16, 4096));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*gen) return run_generate(config_path, count, seed, jobs, out_dir, quiet);
    if (*stats) return run_stats(manifest_path, emit_dir);
    if (*val) return run_validate(manifest_path);
    if (*one) return run_render_one(model, labels, damage, one_seed, one_out, quality, size);
    if (*prev) return run_preview(prev_type, prev_seed, prev_out, prev_size);
  } catch (const Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", std::string(to_string(e.kind())).c_str(), e.what());
    return exit_code_for(e);
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
  return kExitOk;
}
