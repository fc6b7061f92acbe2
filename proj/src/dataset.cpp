#include "carsynth/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <thread>

#include "carsynth/error.hpp"
#include "carsynth/image_io.hpp"
#include "json.hpp"

namespace carsynth {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Config (de)serialization

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorKind::ConfigInvalid, msg); }

json range_json(const Range& r) { return json::array({r.min, r.max}); }

void read_range(const json& obj, const char* key, Range& r) {
  if (!obj.contains(key)) return;
  const auto& v = obj.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    config_error(std::string("'") + key + "' must be a [min, max] pair");
  r = {v[0].get<double>(), v[1].get<double>()};
}

json noise_params_json(const NoiseParams& p) {
  return {{"scale", p.scale}, {"amplitude", p.amplitude}, {"distortion", p.distortion}, {"octaves", p.octaves}};
}

void read_noise_params(const json& obj, const char* key, NoiseParams& p) {
  if (!obj.contains(key)) return;
  const json& o = obj.at(key);
  p.scale = o.value("scale", p.scale);
  p.amplitude = o.value("amplitude", p.amplitude);
  p.distortion = o.value("distortion", p.distortion);
  p.octaves = o.value("octaves", p.octaves);
}

json damage_noise_json(const DamageNoise& n) {
  return {{"perlin", noise_params_json(n.perlin)},
          {"voronoi_color", noise_params_json(n.voronoi_color)},
          {"voronoi_distance", noise_params_json(n.voronoi_distance)},
          {"wave", noise_params_json(n.wave)},
          {"jitter", n.jitter}};
}

void read_damage_noise(const json& o, DamageNoise& n) {
  read_noise_params(o, "perlin", n.perlin);
  read_noise_params(o, "voronoi_color", n.voronoi_color);
  read_noise_params(o, "voronoi_distance", n.voronoi_distance);
  read_noise_params(o, "wave", n.wave);
  n.jitter = o.value("jitter", n.jitter);
}

json ranges_json(const ParameterRanges& r) {
  return {
      {"dent", {{"area", range_json(r.dent.area)}, {"depth", range_json(r.dent.depth)}}},
      {"scratch", {{"area", range_json(r.scratch.area)}}},
      {"crack", {{"area", range_json(r.crack.area)}, {"line_width", range_json(r.crack.line_width)}}},
      {"glass_shatter",
       {{"area", range_json(r.shatter.area)},
        {"ring_scale", range_json(r.shatter.ring_scale)},
        {"thickness", range_json(r.shatter.thickness)},
        {"line_count", range_json(r.shatter.line_count)}}},
      {"broken_lamp",
       {{"area", range_json(r.lamp.area)},
        {"thickness", range_json(r.lamp.thickness)},
        {"chunk_radius", range_json(r.lamp.chunk_radius)}}},
  };
}

void read_ranges(const json& o, ParameterRanges& r) {
  auto section = [&](const char* key) -> const json* { return o.contains(key) ? &o.at(key) : nullptr; };
  if (const json* s = section("dent")) {
    read_range(*s, "area", r.dent.area);
    read_range(*s, "depth", r.dent.depth);
  }
  if (const json* s = section("scratch")) read_range(*s, "area", r.scratch.area);
  if (const json* s = section("crack")) {
    read_range(*s, "area", r.crack.area);
    read_range(*s, "line_width", r.crack.line_width);
  }
  if (const json* s = section("glass_shatter")) {
    read_range(*s, "area", r.shatter.area);
    read_range(*s, "ring_scale", r.shatter.ring_scale);
    read_range(*s, "thickness", r.shatter.thickness);
    read_range(*s, "line_count", r.shatter.line_count);
  }
  if (const json* s = section("broken_lamp")) {
    read_range(*s, "area", r.lamp.area);
    read_range(*s, "thickness", r.lamp.thickness);
    read_range(*s, "chunk_radius", r.lamp.chunk_radius);
  }
}

constexpr MaterialClass kMaterials[] = {MaterialClass::Metal, MaterialClass::Glass, MaterialClass::Lamp,
                                        MaterialClass::Other};

json compat_json(const CompatibilityMatrix& c) {
  json out = json::object();
  for (auto m : kMaterials) {
    json types = json::array();
    for (auto t : c.types_for(m)) types.push_back(std::string(to_string(t)));
    out[std::string(to_string(m))] = types;
  }
  return out;
}

CompatibilityMatrix compat_from_json(const json& o) {
  CompatibilityMatrix c = CompatibilityMatrix::defaults();
  for (auto m : kMaterials) {
    const std::string key(to_string(m));
    if (!o.contains(key)) continue;
    for (auto t : kDamageTypes) c.set(m, t, false);
    for (const auto& name : o.at(key)) c.set(m, damage_type_from_string(name.get<std::string>()), true);
  }
  return c;
}

json camera_ranges_json(const CameraRanges& c) {
  return {{"yaw_deg", range_json(c.yaw_deg)},
          {"pitch_deg", range_json(c.pitch_deg)},
          {"distance", range_json(c.distance)},
          {"jitter_deg", range_json(c.jitter_deg)},
          {"vertical_fov_deg", c.vertical_fov_deg},
          {"max_distance_factor", c.max_distance_factor},
          {"visibility_retries", c.visibility_retries}};
}

void read_camera_ranges(const json& o, CameraRanges& c) {
  read_range(o, "yaw_deg", c.yaw_deg);
  read_range(o, "pitch_deg", c.pitch_deg);
  read_range(o, "distance", c.distance);
  read_range(o, "jitter_deg", c.jitter_deg);
  c.vertical_fov_deg = o.value("vertical_fov_deg", c.vertical_fov_deg);
  c.max_distance_factor = o.value("max_distance_factor", c.max_distance_factor);
  c.visibility_retries = o.value("visibility_retries", c.visibility_retries);
}

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

GenerationConfig GenerationConfig::defaults() {
  GenerationConfig c;
  for (auto style : kCarStyles) c.models.push_back({std::string(to_string(style)), style, {}, {}});
  return c;
}

GenerationConfig GenerationConfig::from_json_text(std::string_view text, const fs::path& base_dir) {
  GenerationConfig c = defaults();
  try {
    const json doc = json::parse(text);
    if (!doc.is_object()) config_error("config must be a JSON object");
    if (doc.contains("models")) {
      c.models.clear();
      for (const auto& m : doc.at("models")) {
        ModelSource src;
        if (m.contains("builtin")) {
          src.builtin = car_style_from_string(m.at("builtin").get<std::string>());
          src.id = m.value("id", std::string(to_string(*src.builtin)));
        } else {
          src.geometry = resolve(base_dir, m.at("geometry").get<std::string>());
          src.labels = resolve(base_dir, m.at("labels").get<std::string>());
          src.id = m.value("id", src.geometry.stem().string());
        }
        c.models.push_back(std::move(src));
      }
    }
    if (doc.contains("image_count")) {
      const auto& n = doc.at("image_count");
      if (!n.is_number_integer() || n.get<long long>() < 1) config_error("image_count must be a positive integer");
      c.image_count = n.get<std::size_t>();
    }
    if (doc.contains("base_seed")) {
      const auto& s = doc.at("base_seed");
      if (!s.is_number_integer()) config_error("base_seed must be an integer");
      c.base_seed = s.is_number_unsigned() ? s.get<std::uint64_t>()
                                           : static_cast<std::uint64_t>(s.get<std::int64_t>());
    }
    c.damage_free_fraction = doc.value("damage_free_fraction", c.damage_free_fraction);
    if (doc.contains("output_dir")) c.output_dir = resolve(base_dir, doc.at("output_dir").get<std::string>());
    if (doc.contains("environment_dir"))
      c.environment_dir = resolve(base_dir, doc.at("environment_dir").get<std::string>());
    c.environment_exposure = doc.value("environment_exposure", c.environment_exposure);
    if (doc.contains("palette")) c.palette_path = resolve(base_dir, doc.at("palette").get<std::string>());
    if (doc.contains("parts")) c.parts_path = resolve(base_dir, doc.at("parts").get<std::string>());
    if (doc.contains("resolution")) {
      const auto r = doc.at("resolution").get<std::vector<int>>();
      if (r.size() != 2) config_error("resolution must be [width, height]");
      c.scene.resolution = {r[0], r[1]};
    }
    if (doc.contains("quality")) c.quality = render_quality_from_string(doc.at("quality").get<std::string>());
    c.jobs = doc.value("jobs", c.jobs);
    c.export_meshes = doc.value("export_meshes", c.export_meshes);
    if (doc.contains("splits")) {
      const json& s = doc.at("splits");
      c.splits = {s.value("train", c.splits.train), s.value("val", c.splits.val), s.value("test", c.splits.test)};
    }
    if (doc.contains("camera")) read_camera_ranges(doc.at("camera"), c.scene.camera);
    if (doc.contains("damage")) {
      const json& d = doc.at("damage");
      if (d.contains("ranges")) read_ranges(d.at("ranges"), c.scene.ranges);
      if (d.contains("noise"))
        for (const auto& [name, value] : d.at("noise").items())
          read_damage_noise(value, c.scene.noise[damage_type_from_string(name)]);
      if (d.contains("compatibility")) c.scene.compat = compat_from_json(d.at("compatibility"));
    }
  } catch (const json::exception& e) {
    config_error(std::string("bad config: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigInvalid) throw;
    config_error(e.what());
  }
  return c;
}

GenerationConfig GenerationConfig::load(const fs::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    config_error(e.what());
  }
  return from_json_text(text, path.parent_path());
}

std::string GenerationConfig::to_json_text(bool include_output_dir) const {
  json models_json = json::array();
  for (const auto& m : models) {
    if (m.builtin)
      models_json.push_back({{"id", m.id}, {"builtin", std::string(to_string(*m.builtin))}});
    else
      models_json.push_back({{"id", m.id}, {"geometry", m.geometry.string()}, {"labels", m.labels.string()}});
  }
  json noise = json::object();
  for (auto t : kDamageTypes) noise[std::string(to_string(t))] = damage_noise_json(scene.noise[t]);
  json doc = {
      {"models", models_json},
      {"image_count", image_count},
      {"base_seed", base_seed},
      {"damage_free_fraction", damage_free_fraction},
      {"environment_dir", environment_dir.string()},
      {"environment_exposure", environment_exposure},
      {"palette", palette_path.string()},
      {"parts", parts_path.string()},
      {"resolution", {scene.resolution.width, scene.resolution.height}},
      {"quality", std::string(to_string(quality))},
      {"jobs", jobs},
      {"export_meshes", export_meshes},
      {"splits", {{"train", splits.train}, {"val", splits.val}, {"test", splits.test}}},
      {"camera", camera_ranges_json(scene.camera)},
      {"damage",
       {{"ranges", ranges_json(scene.ranges)}, {"noise", noise}, {"compatibility", compat_json(scene.compat)}}},
  };
  if (include_output_dir) doc["output_dir"] = output_dir.string();
  return doc.dump(2) + "\n";
}

void GenerationConfig::validate() const {
  try {
    if (models.empty()) config_error("at least one model is required");
    if (image_count < 1) config_error("image_count must be >= 1");
    if (!(damage_free_fraction >= 0 && damage_free_fraction <= 1))
      config_error("damage_free_fraction must lie in [0, 1]");
    if (scene.resolution.width <= 0 || scene.resolution.height <= 0 || scene.resolution.width > 16384 ||
        scene.resolution.height > 16384)
      config_error("resolution must be positive");
    if (jobs < 0) config_error("jobs must be >= 0");
    if (!(environment_exposure > 0)) config_error("environment_exposure must be positive");
    if (!(splits.train >= 0 && splits.val >= 0 && splits.test >= 0 && splits.train + splits.val + splits.test > 0))
      config_error("split weights must be non-negative with a positive sum");
    scene.camera.validate();
    scene.ranges.validate();
    for (auto t : kDamageTypes) scene.noise[t].validate();
    std::error_code ec;
    for (const auto& m : models) {
      if (m.builtin) continue;
      if (!fs::is_regular_file(m.geometry, ec)) config_error("model geometry not found: " + m.geometry.string());
      if (!fs::is_regular_file(m.labels, ec)) config_error("model labels not found: " + m.labels.string());
    }
    if (!palette_path.empty() && !fs::is_regular_file(palette_path, ec))
      config_error("palette not found: " + palette_path.string());
    if (!parts_path.empty() && !fs::is_regular_file(parts_path, ec))
      config_error("parts registry not found: " + parts_path.string());
    if (!environment_dir.empty() && !fs::is_directory(environment_dir, ec))
      config_error("environment directory not found: " + environment_dir.string());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigInvalid) throw;
    config_error(e.what());
  }
}

// ---------------------------------------------------------------------------
// Scheduling

std::uint64_t image_seed(std::uint64_t base_seed, std::size_t index) {
  return hash_combine(base_seed, static_cast<std::uint64_t>(index));
}

bool is_damage_free(std::size_t index, double f) {
  const auto count = [f](std::size_t n) { return static_cast<std::size_t>(std::floor(static_cast<double>(n) * f)); };
  return count(index + 1) > count(index);
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "train";
}

std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitWeights& w) {
  const double total = w.train + w.val + w.test;
  const auto train = std::min<std::size_t>(n, static_cast<std::size_t>(std::llround(n * w.train / total)));
  const auto val = std::min<std::size_t>(n - train, static_cast<std::size_t>(std::llround(n * w.val / total)));
  return {train, val, n - train - val};
}

Split split_of(std::size_t index, const std::array<std::size_t, 3>& sizes) {
  if (index < sizes[0]) return Split::Train;
  if (index < sizes[0] + sizes[1]) return Split::Val;
  return Split::Test;
}

// ---------------------------------------------------------------------------
// Manifest

std::size_t DatasetManifest::failures() const {
  return static_cast<std::size_t>(std::count_if(images.begin(), images.end(), [](const auto& r) { return !r.ok; }));
}

std::string DatasetManifest::to_json_text() const {
  json records = json::array();
  for (const auto& r : images) {
    json damages_json = json::array();
    for (auto t : r.damages) damages_json.push_back(std::string(to_string(t)));
    json rec = {{"index", r.index},
                {"seed", r.seed},
                {"model", r.model_id},
                {"split", std::string(to_string(r.split))},
                {"damage_free", r.damage_free},
                {"status", r.ok ? "ok" : "failed"},
                {"damages", damages_json},
                {"files", {{"image", r.image_path}, {"parts", r.part_path}, {"damage", r.damage_path}, {"meta", r.meta_path}}}};
    if (!r.ok) rec["error"] = r.error;
    records.push_back(std::move(rec));
  }
  const json doc = {
      {"engine_version", engine_version},
      {"base_seed", base_seed},
      {"image_count", images.size()},
      {"failures", failures()},
      {"splits", {{"train", split_sizes[0]}, {"val", split_sizes[1]}, {"test", split_sizes[2]}}},
      {"config", json::parse(config_json.empty() ? "{}" : config_json)},
      {"parts", json::parse(registry.to_json_text())},
      {"compatibility", compat_json(compat)},
      {"images", records},
  };
  return doc.dump(2) + "\n";
}

DatasetManifest DatasetManifest::from_json_text(std::string_view text, const fs::path& root) {
  DatasetManifest m;
  m.root = root;
  try {
    const json doc = json::parse(text);
    m.engine_version = doc.value("engine_version", std::string());
    m.base_seed = doc.at("base_seed").get<std::uint64_t>();
    if (doc.contains("config")) m.config_json = doc.at("config").dump(2) + "\n";
    if (doc.contains("parts")) m.registry = PartRegistry::from_json_text(doc.at("parts").dump());
    if (doc.contains("compatibility")) m.compat = compat_from_json(doc.at("compatibility"));
    if (doc.contains("splits")) {
      const json& s = doc.at("splits");
      m.split_sizes = {s.value("train", std::size_t{0}), s.value("val", std::size_t{0}), s.value("test", std::size_t{0})};
    }
    for (const auto& rec : doc.at("images")) {
      ImageRecord r;
      r.index = rec.at("index").get<std::size_t>();
      r.seed = rec.at("seed").get<std::uint64_t>();
      r.model_id = rec.value("model", std::string());
      const std::string split = rec.value("split", std::string("train"));
      r.split = split == "val" ? Split::Val : split == "test" ? Split::Test : Split::Train;
      r.damage_free = rec.value("damage_free", false);
      r.ok = rec.value("status", std::string()) == "ok";
      r.error = rec.value("error", std::string());
      for (const auto& t : rec.value("damages", json::array())) r.damages.push_back(damage_type_from_string(t.get<std::string>()));
      const json& f = rec.at("files");
      r.image_path = f.value("image", std::string());
      r.part_path = f.value("parts", std::string());
      r.damage_path = f.value("damage", std::string());
      r.meta_path = f.value("meta", std::string());
      m.images.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("bad manifest: ") + e.what());
  }
  return m;
}

DatasetManifest DatasetManifest::load(const fs::path& path) {
  return from_json_text(read_text_file(path), path.parent_path());
}

// ---------------------------------------------------------------------------
// Generation

std::vector<LabeledMesh> load_models(const GenerationConfig& config, const PartRegistry& registry) {
  std::vector<LabeledMesh> out;
  for (const auto& m : config.models)
    out.push_back(m.builtin ? make_procedural_car(*m.builtin, registry)
                            : load_labeled_mesh(m.geometry, m.labels, registry));
  return out;
}

namespace {

std::string index_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu", i);
  return buf;
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
}

}  // namespace

DatasetManifest generate(const GenerationConfig& config, const GenerateOptions& options) {
  config.validate();
  const PartRegistry registry = config.parts_path.empty() ? PartRegistry::defaults() : PartRegistry::load(config.parts_path);
  const PaintPalette palette =
      config.palette_path.empty() ? PaintPalette::defaults() : PaintPalette::load(config.palette_path);
  const std::vector<Environment> envs = scan_environment_dir(config.environment_dir, config.environment_exposure);
  const std::vector<LabeledMesh> models = load_models(config, registry);

  const fs::path& out = config.output_dir;
  for (const char* sub : {"images", "parts", "damage", "meta"}) make_dir(out / sub);
  if (config.export_meshes) make_dir(out / "meshes");

  DatasetManifest manifest;
  manifest.config_json = config.to_json_text(false);
  manifest.base_seed = config.base_seed;
  manifest.registry = registry;
  manifest.compat = config.scene.compat;
  manifest.split_sizes = split_sizes(config.image_count, config.splits);
  manifest.root = out;
  manifest.images.resize(config.image_count);

  int jobs = config.jobs > 0 ? config.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  jobs = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(jobs), config.image_count));
  const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const int render_threads = std::max(1, hw / jobs);

  auto run_one = [&](std::size_t i) {
    ImageRecord& rec = manifest.images[i];
    rec.index = i;
    rec.seed = image_seed(config.base_seed, i);
    const std::size_t model_index = i % models.size();
    rec.model_id = config.models[model_index].id;
    rec.split = split_of(i, manifest.split_sizes);
    rec.damage_free = is_damage_free(i, config.damage_free_fraction);
    const std::string name = index_name(i);
    rec.image_path = "images/" + name + ".png";
    rec.part_path = "parts/" + name + ".png";
    rec.damage_path = "damage/" + name + ".png";
    rec.meta_path = "meta/" + name + ".json";
    try {
      Rng rng(rec.seed);
      const LabeledMesh& mesh = models[model_index];
      std::optional<DamagePlan> plan;
      if (!rec.damage_free)
        plan = sample_damage_plan(mesh, registry, config.scene.compat, config.scene.ranges, config.scene.noise, rng);
      SceneDescription scene = sample_scene(mesh, registry, plan, envs, palette, config.scene, rec.seed, rng);
      scene.model_id = rec.model_id;
      const RenderOutput result = render(scene, config.quality, render_threads);
      for (const auto& d : scene.damages) rec.damages.push_back(d.type);

      write_png_rgb(out / rec.image_path, result.rgb);
      write_png_gray(out / rec.part_path, result.part_map);
      write_png_gray(out / rec.damage_path, result.damage_map);
      json meta = json::parse(result.metadata);
      meta["index"] = i;
      meta["split"] = std::string(to_string(rec.split));
      meta["damage_free"] = rec.damage_free;
      meta["files"] = {{"image", rec.image_path}, {"parts", rec.part_path}, {"damage", rec.damage_path}};
      if (config.export_meshes) {
        const std::string obj = "meshes/" + name + ".obj", labels = "meshes/" + name + ".labels.json";
        save_labeled_mesh(scene.mesh, registry, out / obj, out / labels);
        meta["files"]["mesh"] = obj;
        meta["files"]["mesh_labels"] = labels;
      }
      write_text_file(out / rec.meta_path, meta.dump(2) + "\n");
      rec.ok = true;
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.error = e.what();
      rec.damages.clear();
    }
  };

  std::atomic<std::size_t> next{0}, done{0};
  std::mutex progress_mutex;
  auto worker = [&]() {
    for (std::size_t i = next++; i < config.image_count; i = next++) {
      run_one(i);
      const std::size_t d = ++done;
      if (options.progress) {
        std::lock_guard lock(progress_mutex);
        options.progress(d, config.image_count);
      }
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  write_text_file(out / "manifest.json", manifest.to_json_text());
  return manifest;
}

// ---------------------------------------------------------------------------
// Statistics

std::array<double, DamageStats::kBins + 1> DamageStats::bin_edges() {
  std::array<double, kBins + 1> e{};
  for (int k = 0; k <= kBins; ++k) e[k] = std::pow(10.0, -5.0 + 5.0 * k / kBins);
  return e;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (v[hi] - v[lo]) * (pos - static_cast<double>(lo));
}

namespace {

LabelImage read_mask(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw Error(ErrorKind::MissingMask, "missing mask " + path.string());
  try {
    return read_png_gray(path);
  } catch (const Error& e) {
    throw Error(ErrorKind::MissingMask, std::string("unreadable mask: ") + e.what());
  }
}

}  // namespace

DamageStats compute_stats(const DatasetManifest& manifest) {
  DamageStats s;
  const auto edges = DamageStats::bin_edges();
  for (const auto& rec : manifest.images) {
    if (!rec.ok) continue;
    const LabelImage damage = read_mask(manifest.root / rec.damage_path);
    const LabelImage parts = read_mask(manifest.root / rec.part_path);
    if (damage.width != parts.width || damage.height != parts.height)
      throw Error(ErrorKind::MissingMask, "mask sizes differ for image " + std::to_string(rec.index));
    ++s.image_count;
    std::array<std::size_t, 6> counts{};
    for (std::size_t p = 0; p < damage.pixels.size(); ++p) {
      const int d = damage.pixels[p];
      if (d == 0 || d > 5) continue;
      ++counts[d];
      ++s.cooccurrence[d][std::min<int>(parts.pixels[p], 27)];
      ++s.damaged_pixels[d];
    }
    const double total = static_cast<double>(damage.pixels.size());
    bool damaged = false;
    for (int t = 1; t <= 5; ++t) {
      if (counts[t] == 0) continue;
      damaged = true;
      const double f = static_cast<double>(counts[t]) / total;
      s.area_fractions[t].push_back(f);
      ++s.image_counts[t];
      const auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, f);
      ++s.histograms[t][static_cast<std::size_t>(it - (edges.begin() + 1))];
    }
    if (damaged) ++s.damaged_image_count;
  }
  for (int t = 1; t <= 5; ++t) {
    const auto& v = s.area_fractions[t];
    s.quantiles[t] = {quantile(v, 0), quantile(v, 0.25), quantile(v, 0.5), quantile(v, 0.75), quantile(v, 1)};
  }
  return s;
}

std::string DamageStats::to_json_text() const {
  json types = json::object();
  for (auto t : kDamageTypes) {
    const auto i = static_cast<std::size_t>(t);
    const Quantiles& q = quantiles[i];
    types[std::string(to_string(t))] = {
        {"image_count", image_counts[i]},
        {"damaged_pixels", damaged_pixels[i]},
        {"area_fraction",
         {{"min", q.min}, {"q25", q.q25}, {"median", q.median}, {"q75", q.q75}, {"max", q.max}}},
        {"histogram", histograms[i]},
    };
  }
  const json doc = {{"image_count", image_count},
                    {"damaged_image_count", damaged_image_count},
                    {"histogram_edges", bin_edges()},
                    {"types", types}};
  return doc.dump(2) + "\n";
}

void DamageStats::write_csv(const fs::path& dir, const PartRegistry& registry) const {
  make_dir(dir);
  std::string fractions = "type,area_fraction\n";
  std::string hist = "type,bin_low,bin_high,count\n";
  std::string counts = "type,image_count,damaged_pixels,median_area_fraction\n";
  const auto edges = bin_edges();
  for (auto t : kDamageTypes) {
    const auto i = static_cast<std::size_t>(t);
    const std::string name(to_string(t));
    for (double f : area_fractions[i]) fractions += name + "," + std::to_string(f) + "\n";
    for (int b = 0; b < kBins; ++b)
      hist += name + "," + std::to_string(edges[b]) + "," + std::to_string(edges[b + 1]) + "," +
              std::to_string(histograms[i][b]) + "\n";
    counts += name + "," + std::to_string(image_counts[i]) + "," + std::to_string(damaged_pixels[i]) + "," +
              std::to_string(quantiles[i].median) + "\n";
  }
  std::string co = "type";
  for (const auto& p : registry.parts()) co += "," + p.name;
  co += "\n";
  for (auto t : kDamageTypes) {
    co += std::string(to_string(t));
    for (const auto& p : registry.parts())
      co += "," + std::to_string(cooccurrence[static_cast<std::size_t>(t)][std::min(p.id, 27)]);
    co += "\n";
  }
  write_text_file(dir / "area_fractions.csv", fractions);
  write_text_file(dir / "histograms.csv", hist);
  write_text_file(dir / "image_counts.csv", counts);
  write_text_file(dir / "cooccurrence.csv", co);
}

// ---------------------------------------------------------------------------
// Validation

std::size_t count_incompatible_pixels(const LabelImage& parts, const LabelImage& damage,
                                      const PartRegistry& registry, const CompatibilityMatrix& compat) {
  std::size_t bad = 0;
  for (std::size_t p = 0; p < damage.pixels.size(); ++p) {
    const int d = damage.pixels[p];
    if (d == 0) continue;
    const int part = parts.pixels[p];
    if (part == 0 || !registry.contains(part) || d > 5 ||
        !compat.allows(registry.material(part), static_cast<DamageType>(d)))
      ++bad;
  }
  return bad;
}

ValidationReport validate_manifest(const DatasetManifest& manifest) {
  ValidationReport report;
  auto add = [&](std::size_t index, std::string kind, std::string msg) {
    report.violations.push_back({index, std::move(kind), std::move(msg)});
  };
  std::error_code ec;
  for (std::size_t k = 0; k < manifest.images.size(); ++k) {
    const ImageRecord& rec = manifest.images[k];
    ++report.images_checked;
    if (rec.index != k) add(rec.index, "index", "record " + std::to_string(k) + " has index " + std::to_string(rec.index));
    if (rec.seed != image_seed(manifest.base_seed, rec.index))
      add(rec.index, "seed", "seed does not match hash_combine(base_seed, index)");
    if (!rec.ok) {
      add(rec.index, "failed_image", rec.error);
      continue;
    }
    bool files_ok = true;
    for (const auto* rel : {&rec.image_path, &rec.part_path, &rec.damage_path, &rec.meta_path})
      if (rel->empty() || !fs::is_regular_file(manifest.root / *rel, ec)) {
        add(rec.index, "missing_file", "missing " + *rel);
        files_ok = false;
      }
    if (!files_ok) continue;
    LabelImage parts, damage;
    try {
      parts = read_png_gray(manifest.root / rec.part_path);
      damage = read_png_gray(manifest.root / rec.damage_path);
    } catch (const Error& e) {
      add(rec.index, "missing_file", e.what());
      continue;
    }
    if (parts.width != damage.width || parts.height != damage.height) {
      add(rec.index, "size", "part and damage maps differ in size");
      continue;
    }
    std::size_t out_of_range = 0, background = 0, incompatible = 0;
    for (std::size_t p = 0; p < parts.pixels.size(); ++p) {
      const int part = parts.pixels[p], d = damage.pixels[p];
      if ((part != 0 && !manifest.registry.contains(part)) || d > 5) {
        ++out_of_range;
        continue;
      }
      if (d == 0) continue;
      if (part == 0)
        ++background;
      else if (!manifest.compat.allows(manifest.registry.material(part), static_cast<DamageType>(d)))
        ++incompatible;
    }
    if (out_of_range) add(rec.index, "id_range", std::to_string(out_of_range) + " pixels carry unknown ids");
    if (background) add(rec.index, "background_damage", std::to_string(background) + " damaged background pixels");
    if (incompatible)
      add(rec.index, "compatibility", std::to_string(incompatible) + " pixels pair a damage with an incompatible part");
  }
  return report;
}

}  // namespace carsynth
