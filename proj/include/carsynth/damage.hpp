#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "carsynth/error.hpp"
#include "carsynth/math.hpp"
#include "carsynth/mesh.hpp"
#include "carsynth/noise.hpp"

namespace carsynth {

/// Integer codes double as damage-map pixel values.
enum class DamageType : std::uint8_t {
  None = 0,
  Dent = 1,
  Scratch = 2,
  Crack = 3,
  GlassShatter = 4,
  BrokenLamp = 5,
};

inline constexpr std::array<DamageType, 5> kDamageTypes = {
    DamageType::Dent, DamageType::Scratch, DamageType::Crack, DamageType::GlassShatter,
    DamageType::BrokenLamp};

std::string_view to_string(DamageType t);
/// Accepts the canonical names ("dent", "glass_shatter", ...) and the codes "1".."5".
DamageType damage_type_from_string(std::string_view name);

/// Noise parameters for every sub-generator a damage may use.
struct DamageNoise {
  NoiseParams perlin{4.0, 0.0, 0.0, 1};
  NoiseParams voronoi_color{4.0, 0.0, 0.0, 1};
  NoiseParams voronoi_distance{10.0, 1.0, 0.0, 1};
  NoiseParams wave{20.0, 1.0, 0.0, 1};
  double jitter = 0.0;  // noisy_periodic jitter, in [0, 1)

  /// All noise disabled: amplitudes 0, no wave distortion, no jitter.
  static DamageNoise silent();
  void validate() const;
};

struct DamageSpec {
  DamageType type = DamageType::None;
  Vec3 center;                 // c, model units
  Vec3 normal{0, 0, 1};        // surface normal at the center
  double area = 0.1;           // footprint radius a
  double depth = 0.0;          // dent depth d
  double thickness = 0.1;      // shatter ring/line and lamp fracture thickness t
  double ring_scale = 40.0;    // shatter ring frequency s
  int line_count = 6;          // shatter radial lines
  double line_width = 0.02;    // crack line half-width
  double chunk_radius = 0.05;  // broken-lamp missing chunk
  DamageNoise noise;
  std::uint64_t seed = 0;

  NoiseContext context() const { return NoiseContext(seed); }
};

/// Which damage types each material class can carry.
class CompatibilityMatrix {
 public:
  /// metal -> dent/scratch/crack, glass -> shatter, lamp -> broken lamp.
  static CompatibilityMatrix defaults();

  bool allows(MaterialClass material, DamageType type) const;
  void set(MaterialClass material, DamageType type, bool allowed);
  std::vector<DamageType> types_for(MaterialClass material) const;
  bool carries_any(MaterialClass material) const { return !types_for(material).empty(); }

  friend bool operator==(const CompatibilityMatrix&, const CompatibilityMatrix&) = default;

 private:
  std::array<std::array<bool, 6>, 4> allowed_{};
};

struct Range {
  double min = 0;
  double max = 0;
  friend bool operator==(const Range&, const Range&) = default;
};

/// Uniform sampling intervals per damage type (model units).
struct ParameterRanges {
  struct Dent {
    Range area{0.1, 0.6};
    Range depth{0.02, 0.15};
  } dent;
  struct Scratch {
    Range area{0.1, 0.5};
  } scratch;
  struct Crack {
    Range area{0.05, 0.4};
    Range line_width{0.02, 0.02};
  } crack;
  struct Shatter {
    Range area{0.3, 1.0};
    Range ring_scale{20, 80};
    Range thickness{0.05, 0.2};
    Range line_count{4, 12};
  } shatter;
  struct Lamp {
    Range area{0.15, 0.35};
    Range thickness{0.05, 0.2};
    Range chunk_radius{0.02, 0.1};
  } lamp;

  void validate() const;
};

/// Per-type noise bundles copied into every sampled DamageSpec.
struct NoiseDefaults {
  std::array<DamageNoise, 6> by_type;

  static NoiseDefaults defaults();
  const DamageNoise& operator[](DamageType t) const { return by_type[static_cast<std::size_t>(t)]; }
  DamageNoise& operator[](DamageType t) { return by_type[static_cast<std::size_t>(t)]; }
};

/// Convex blend p*s1 + (1-p)*s2. Throws OutOfRange for p outside [0, 1].
template <class T>
T mix(double p, const T& s1, const T& s2) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::OutOfRange, "mix factor outside [0, 1]");
  return s1 * p + s2 * (1.0 - p);
}

/// Radius beyond which the damage's label indicator is always false.
double footprint_radius(const DamageSpec& spec);

/// Noise-perturbed radial coordinate r(x) = |x - c| + perlin(x).
double dent_radius(const Vec3& x, const DamageSpec& spec, const NoiseContext& ctx);

/// Center-peaked raised-cosine profile: depth at r = 0, zero for r >= area.
double dent_length(double r, double area, double depth);

/// Displaces vertices by -l(x) (n + voronoi_color(x)). Topology and labels
/// are unchanged; normals of touched vertices are recomputed.
LabeledMesh dent_displace(const LabeledMesh& mesh, const DamageSpec& spec, const NoiseContext& ctx);

double scratch_factor(const Vec3& x, const DamageSpec& spec, const NoiseContext& ctx);
/// Crack line through c: proximity to x1 = x2 in tangent-plane coordinates
/// rotated by a seeded angle, times the radial falloff (a - |x - c|) / a.
double crack_factor(const Vec3& x, const DamageSpec& spec, const NoiseContext& ctx);
/// Unit tangent along which the (noise-free) crack line runs.
Vec3 crack_direction(const DamageSpec& spec, const NoiseContext& ctx);
/// 0 or 1: concentric ring or radial line.
double shatter_factor(const Vec3& x, const DamageSpec& spec, const NoiseContext& ctx);

struct LampFactors {
  double fracture = 0;  // 0 or 1
  double chunk = 0;     // 0 or 1
};

LampFactors broken_lamp_factors(const Vec3& x, const DamageSpec& spec, const NoiseContext& ctx);

/// Seeded center of the missing lamp chunk, within the tangent plane at c.
Vec3 lamp_chunk_center(const DamageSpec& spec, const NoiseContext& ctx);

/// Orthonormal tangent basis (u, v) at the damage center.
std::pair<Vec3, Vec3> tangent_basis(const Vec3& normal);

/// Ground-truth indicator of a single damage at x.
bool damage_indicator(const Vec3& x, const DamageSpec& spec, const NoiseContext& ctx);

/// Type of the earliest damage (in application order) whose indicator holds at
/// x, or None.
DamageType damage_label(const Vec3& x, std::span<const DamageSpec> applied,
                        std::span<const NoiseContext> contexts);

/// Draws every parameter of a damage of `type` from `ranges`; center, normal
/// and seed are left for the caller.
DamageSpec sample_damage_parameters(DamageType type, const ParameterRanges& ranges,
                                    const NoiseDefaults& noise, Rng& rng);

struct DamagePlan {
  DamageSpec primary;
  int part_id = 0;
  std::uint32_t vertex = 0;
};

/// Uniform type (restricted to types some part of this mesh accepts), then a
/// uniform compatible part, then a uniform vertex of that part as center.
DamagePlan sample_damage_plan(const LabeledMesh& mesh, const PartRegistry& registry,
                              const CompatibilityMatrix& compat, const ParameterRanges& ranges,
                              const NoiseDefaults& noise, Rng& rng);

struct DamageCandidate {
  std::uint32_t vertex = 0;
  int part_id = 0;
  friend bool operator==(const DamageCandidate&, const DamageCandidate&) = default;
};

/// Secondary damages: one with probability 0.5, then each further one with
/// probability 0.2, until a draw fails. `parts` (optional) receives the part
/// of each returned damage's center.
std::vector<DamageSpec> secondary_damage_chain(std::span<const DamageCandidate> candidates,
                                               const LabeledMesh& mesh, const PartRegistry& registry,
                                               const CompatibilityMatrix& compat,
                                               const ParameterRanges& ranges,
                                               const NoiseDefaults& noise, Rng& rng,
                                               std::vector<int>* parts = nullptr);

inline constexpr double kFirstSecondaryProbability = 0.5;
inline constexpr double kFurtherSecondaryProbability = 0.2;

}  // namespace carsynth
