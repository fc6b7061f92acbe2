#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "carsynth/damage.hpp"
#include "carsynth/mesh.hpp"
#include "carsynth/procedural.hpp"
#include "carsynth/render.hpp"
#include "carsynth/scene.hpp"

namespace carsynth {

inline constexpr std::string_view kEngineVersion = "carsynth 0.1.0";

/// A car model: either a built-in procedural style or an OBJ + label file.
struct ModelSource {
  std::string id;
  std::optional<CarStyle> builtin;
  std::filesystem::path geometry;
  std::filesystem::path labels;
};

/// Relative weights of the train / val / test splits.
struct SplitWeights {
  double train = 83604;
  double val = 8311;
  double test = 9135;
};

struct GenerationConfig {
  std::vector<ModelSource> models;
  std::size_t image_count = 1;
  std::uint64_t base_seed = 0;
  double damage_free_fraction = 0.0;
  SceneConfig scene;
  std::filesystem::path environment_dir;  // empty: built-in skies
  double environment_exposure = 1.0;
  std::filesystem::path palette_path;     // empty: built-in palette
  std::filesystem::path parts_path;       // empty: built-in registry
  std::filesystem::path output_dir = "out";
  RenderQuality quality = RenderQuality::Preview;
  int jobs = 0;                           // 0: hardware concurrency
  SplitWeights splits;
  bool export_meshes = false;

  /// Built-in defaults with the four procedural styles as models.
  static GenerationConfig defaults();
  /// Parses a JSON config; relative paths resolve against `base_dir`. Keys
  /// that are absent keep their defaults. Throws ConfigInvalid.
  static GenerationConfig from_json_text(std::string_view text, const std::filesystem::path& base_dir = {});
  static GenerationConfig load(const std::filesystem::path& path);

  /// Full JSON form. The output directory is omitted unless asked for, so
  /// the snapshot does not depend on where a run writes.
  std::string to_json_text(bool include_output_dir = true) const;

  /// Throws ConfigInvalid for out-of-range values or missing files.
  void validate() const;
};

/// Per-image seed: hash_combine(base_seed, index).
std::uint64_t image_seed(std::uint64_t base_seed, std::size_t index);

/// Images whose index i satisfies floor((i+1) f) > floor(i f) are damage-free,
/// which spreads floor(n f) of them evenly over the batch.
bool is_damage_free(std::size_t index, double damage_free_fraction);

enum class Split { Train, Val, Test };
std::string_view to_string(Split s);

/// Split sizes by rounding: train = round(n w_train), val = round(n w_val),
/// test takes the rest. Splits are contiguous index ranges in that order.
std::array<std::size_t, 3> split_sizes(std::size_t image_count, const SplitWeights& w);
Split split_of(std::size_t index, const std::array<std::size_t, 3>& sizes);

struct ImageRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::string model_id;
  Split split = Split::Train;
  bool damage_free = false;
  bool ok = false;
  std::string error;
  std::vector<DamageType> damages;  // application order
  std::string image_path, part_path, damage_path, meta_path;  // relative to the output dir
};

struct DatasetManifest {
  std::string engine_version{kEngineVersion};
  std::string config_json;  // snapshot without the output directory
  std::uint64_t base_seed = 0;
  PartRegistry registry = PartRegistry::defaults();
  CompatibilityMatrix compat = CompatibilityMatrix::defaults();
  std::array<std::size_t, 3> split_sizes{};
  std::vector<ImageRecord> images;
  std::filesystem::path root;  // directory holding the manifest; not serialized

  std::size_t failures() const;
  std::string to_json_text() const;
  static DatasetManifest from_json_text(std::string_view text, const std::filesystem::path& root);
  static DatasetManifest load(const std::filesystem::path& path);
};

struct GenerateOptions {
  std::function<void(std::size_t done, std::size_t total)> progress;
};

/// Runs the whole batch and writes `<out>/manifest.json` last. Per-image
/// failures are recorded and do not stop the run. Throws ConfigInvalid or
/// IoFailure for problems that prevent any output.
DatasetManifest generate(const GenerationConfig& config, const GenerateOptions& options = {});

/// Loads every configured model, normalized and part-labeled.
std::vector<LabeledMesh> load_models(const GenerationConfig& config, const PartRegistry& registry);

struct Quantiles {
  double min = 0, q25 = 0, median = 0, q75 = 0, max = 0;
};

struct DamageStats {
  static constexpr int kBins = 20;
  /// Log-spaced bin edges for area fractions, from 1e-5 to 1.
  static std::array<double, kBins + 1> bin_edges();

  std::size_t image_count = 0;
  std::size_t damaged_image_count = 0;
  std::array<std::vector<double>, 6> area_fractions;         // per type, images containing it
  std::array<std::array<std::size_t, kBins>, 6> histograms{};
  std::array<Quantiles, 6> quantiles{};
  std::array<std::size_t, 6> image_counts{};
  std::array<std::array<std::uint64_t, 28>, 6> cooccurrence{};  // [type][part] pixel counts
  std::array<std::uint64_t, 6> damaged_pixels{};

  std::string to_json_text() const;
  /// Writes area_fractions.csv, histograms.csv, cooccurrence.csv, image_counts.csv.
  void write_csv(const std::filesystem::path& dir, const PartRegistry& registry) const;
};

/// Linear-interpolated quantile of an unsorted sample; 0 for an empty one.
double quantile(std::vector<double> values, double q);

/// Reads the masks of every successful image. Throws MissingMask.
DamageStats compute_stats(const DatasetManifest& manifest);

struct Violation {
  std::size_t index = 0;
  std::string kind;  // missing_file, seed, compatibility, background_damage, id_range, size
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  std::size_t images_checked = 0;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate_manifest(const DatasetManifest& manifest);

/// Counts, over one pair of masks, pixels violating the compatibility matrix
/// or carrying damage on background.
std::size_t count_incompatible_pixels(const LabelImage& parts, const LabelImage& damage,
                                      const PartRegistry& registry, const CompatibilityMatrix& compat);

}  // namespace carsynth
