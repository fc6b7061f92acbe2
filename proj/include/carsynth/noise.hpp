#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "carsynth/math.hpp"
#include "carsynth/rng.hpp"

namespace carsynth {

enum class NoiseGenerator : std::uint8_t {
  Perlin,
  VoronoiColor,
  VoronoiDistance,
  Wave,
  NoisyPeriodic,
};

/// Seeded state shared by all noise evaluators. Immutable after construction,
/// so a single context can be queried from any number of threads.
class NoiseContext {
 public:
  explicit NoiseContext(std::uint64_t seed = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t subseed(NoiseGenerator g) const noexcept {
    return subseeds_[static_cast<std::size_t>(g)];
  }

  /// Independent context derived from this one (e.g. the two coordinate
  /// streams of a crack).
  NoiseContext child(std::uint64_t salt) const { return NoiseContext(hash_combine(seed_, salt)); }

  /// Unit direction across which wave bands alternate.
  const Vec3& wave_axis() const noexcept { return wave_axis_; }

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 5> subseeds_{};
  Vec3 wave_axis_;
};

struct NoiseParams {
  double scale = 1.0;       // spatial frequency per model unit
  double amplitude = 1.0;
  double distortion = 0.0;  // wave only
  int octaves = 1;          // Perlin only

  /// Throws Error(OutOfRange) when a field is outside its domain.
  void validate() const;
};

/// Lattice-gradient noise in [-amplitude, amplitude]. A single octave is zero
/// at every integer point of the scaled lattice.
double perlin(const NoiseContext& ctx, const Vec3& p, const NoiseParams& params);

/// Piecewise-constant per Voronoi cell; each component lies in
/// [-amplitude/2, amplitude/2].
Vec3 voronoi_color(const NoiseContext& ctx, const Vec3& p, const NoiseParams& params);

/// Distance from p*scale to the nearest feature point, measured in scaled
/// units. Amplitude does not apply.
double voronoi_distance(const NoiseContext& ctx, const Vec3& p, const NoiseParams& params);

/// Feature point of lattice cell (i, j, k) in scaled coordinates. Each cell
/// holds exactly one feature point.
Vec3 voronoi_feature_point(const NoiseContext& ctx, NoiseGenerator which, std::int64_t i,
                           std::int64_t j, std::int64_t k);

/// Sine bands in [0, 1] with period 1/scale along ctx.wave_axis(); the band
/// phase is displaced by distortion * Perlin.
double wave(const NoiseContext& ctx, const Vec3& p, const NoiseParams& params);

/// Normalized angle in [0, 1) of (p - center) within the (axis_u, axis_v)
/// plane, counter-clockwise from axis_u.
double radial_gradient(const Vec3& p, const Vec3& center, const Vec3& axis_u, const Vec3& axis_v);

/// Non-negative periodic function on u (period 1) with exactly `line_count`
/// zeros per period. With jitter > 0 each zero moves by at most
/// jitter / (2 * line_count).
double noisy_periodic(const NoiseContext& ctx, double u, int line_count, double jitter);

/// Zero locations of noisy_periodic in [0, 1), ascending.
std::vector<double> noisy_periodic_zeros(const NoiseContext& ctx, int line_count, double jitter);

/// Upper bound on |voronoi_color(...)| (Euclidean norm).
inline double voronoi_color_bound(const NoiseParams& params) {
  return params.amplitude * 0.8660254037844387;  // sqrt(3)/2
}

}  // namespace carsynth
