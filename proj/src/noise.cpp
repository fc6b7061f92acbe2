#include "carsynth/noise.hpp"

#include <cmath>
#include <string>

#include "carsynth/error.hpp"

namespace carsynth {
namespace {

constexpr std::array<std::uint64_t, 5> kGeneratorTags = {
    hash_tag("perlin"), hash_tag("voronoi_color"), hash_tag("voronoi_distance"),
    hash_tag("wave"), hash_tag("noisy_periodic")};

std::uint64_t lattice_hash(std::uint64_t seed, std::int64_t i, std::int64_t j, std::int64_t k) {
  std::uint64_t h = hash_combine(seed, static_cast<std::uint64_t>(i));
  h = hash_combine(h, static_cast<std::uint64_t>(j));
  return hash_combine(h, static_cast<std::uint64_t>(k));
}

double unit_from_bits(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

// Perlin's quintic fade, C2 at lattice boundaries.
double fade(double t) { return t * t * t * (t * (t * 6 - 15) + 10); }

// Dot product with one of the twelve cube-edge gradients.
double grad(std::uint64_t h, double x, double y, double z) {
  switch (h % 12) {
    case 0: return x + y;
    case 1: return -x + y;
    case 2: return x - y;
    case 3: return -x - y;
    case 4: return x + z;
    case 5: return -x + z;
    case 6: return x - z;
    case 7: return -x - z;
    case 8: return y + z;
    case 9: return -y + z;
    case 10: return y - z;
    default: return -y - z;
  }
}

double perlin_octave(std::uint64_t seed, const Vec3& q) {
  const double fx = std::floor(q.x), fy = std::floor(q.y), fz = std::floor(q.z);
  const auto ix = static_cast<std::int64_t>(fx);
  const auto iy = static_cast<std::int64_t>(fy);
  const auto iz = static_cast<std::int64_t>(fz);
  const double x = q.x - fx, y = q.y - fy, z = q.z - fz;
  const double u = fade(x), v = fade(y), w = fade(z);

  auto g = [&](int dx, int dy, int dz) {
    return grad(lattice_hash(seed, ix + dx, iy + dy, iz + dz), x - dx, y - dy, z - dz);
  };
  auto mixd = [](double a, double b, double t) { return a + t * (b - a); };

  const double x00 = mixd(g(0, 0, 0), g(1, 0, 0), u);
  const double x10 = mixd(g(0, 1, 0), g(1, 1, 0), u);
  const double x01 = mixd(g(0, 0, 1), g(1, 0, 1), u);
  const double x11 = mixd(g(0, 1, 1), g(1, 1, 1), u);
  return mixd(mixd(x00, x10, v), mixd(x01, x11, v), w);
}

// Unnormalized fractal sum in [-1, 1].
double perlin_unit(std::uint64_t seed, const Vec3& q, int octaves) {
  double sum = 0, weight = 1, total = 0, freq = 1;
  for (int o = 0; o < octaves; ++o) {
    sum += weight * perlin_octave(seed + static_cast<std::uint64_t>(o), q * freq);
    total += weight;
    weight *= 0.5;
    freq *= 2.0;
  }
  return std::clamp(sum / total, -1.0, 1.0);
}

struct NearestFeature {
  double distance;
  std::int64_t i, j, k;
};

Vec3 feature_in_cell(std::uint64_t seed, std::int64_t i, std::int64_t j, std::int64_t k) {
  const std::uint64_t h = lattice_hash(seed, i, j, k);
  return {static_cast<double>(i) + unit_from_bits(mix64(h ^ 1)),
          static_cast<double>(j) + unit_from_bits(mix64(h ^ 2)),
          static_cast<double>(k) + unit_from_bits(mix64(h ^ 3))};
}

// Exact nearest feature point with one point per unit cell. The own cell's
// point is at most sqrt(3) away, so cells beyond +-2 can never win.
NearestFeature nearest_feature(std::uint64_t seed, const Vec3& q) {
  const auto ci = static_cast<std::int64_t>(std::floor(q.x));
  const auto cj = static_cast<std::int64_t>(std::floor(q.y));
  const auto ck = static_cast<std::int64_t>(std::floor(q.z));
  const Vec3 local{q.x - static_cast<double>(ci), q.y - static_cast<double>(cj),
                   q.z - static_cast<double>(ck)};

  NearestFeature best{distance(q, feature_in_cell(seed, ci, cj, ck)), ci, cj, ck};
  double best_sq = best.distance * best.distance;

  auto gap = [](double t, int d) {
    if (d > 0) return static_cast<double>(d) - t;
    if (d < 0) return t - static_cast<double>(d + 1);
    return 0.0;
  };
  for (int dz = -2; dz <= 2; ++dz) {
    const double gz = gap(local.z, dz);
    for (int dy = -2; dy <= 2; ++dy) {
      const double gy = gap(local.y, dy);
      for (int dx = -2; dx <= 2; ++dx) {
        if (dx == 0 && dy == 0 && dz == 0) continue;
        const double gx = gap(local.x, dx);
        if (gx * gx + gy * gy + gz * gz >= best_sq) continue;
        const Vec3 f = feature_in_cell(seed, ci + dx, cj + dy, ck + dz);
        const Vec3 diff = q - f;
        const double d2 = dot(diff, diff);
        if (d2 < best_sq) {
          best_sq = d2;
          best = {0.0, ci + dx, cj + dy, ck + dz};
        }
      }
    }
  }
  best.distance = std::sqrt(best_sq);
  return best;
}

}  // namespace

NoiseContext::NoiseContext(std::uint64_t seed) : seed_(seed) {
  for (std::size_t g = 0; g < subseeds_.size(); ++g) subseeds_[g] = hash_combine(seed, kGeneratorTags[g]);
  // Uniform direction on the sphere for the wave bands.
  const std::uint64_t h = subseeds_[static_cast<std::size_t>(NoiseGenerator::Wave)];
  const double z = 2.0 * unit_from_bits(mix64(h ^ 0x11)) - 1.0;
  const double phi = 2.0 * kPi * unit_from_bits(mix64(h ^ 0x22));
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  wave_axis_ = {r * std::cos(phi), r * std::sin(phi), z};
}

void NoiseParams::validate() const {
  if (!(scale > 0) || !std::isfinite(scale))
    throw Error(ErrorKind::OutOfRange, "noise scale must be positive, got " + std::to_string(scale));
  if (!(amplitude >= 0) || !std::isfinite(amplitude))
    throw Error(ErrorKind::OutOfRange, "noise amplitude must be non-negative");
  if (!(distortion >= 0) || !std::isfinite(distortion))
    throw Error(ErrorKind::OutOfRange, "noise distortion must be non-negative");
  if (octaves < 1) throw Error(ErrorKind::OutOfRange, "noise octaves must be >= 1");
}

double perlin(const NoiseContext& ctx, const Vec3& p, const NoiseParams& params) {
  if (params.amplitude == 0) return 0.0;
  return params.amplitude *
         perlin_unit(ctx.subseed(NoiseGenerator::Perlin), p * params.scale, params.octaves);
}

Vec3 voronoi_color(const NoiseContext& ctx, const Vec3& p, const NoiseParams& params) {
  if (params.amplitude == 0) return {};
  const std::uint64_t seed = ctx.subseed(NoiseGenerator::VoronoiColor);
  const NearestFeature f = nearest_feature(seed, p * params.scale);
  const std::uint64_t h = mix64(lattice_hash(seed, f.i, f.j, f.k) ^ 0xc0105ULL);
  const Vec3 color{unit_from_bits(mix64(h ^ 1)), unit_from_bits(mix64(h ^ 2)),
                   unit_from_bits(mix64(h ^ 3))};
  return (color - Vec3{0.5, 0.5, 0.5}) * params.amplitude;
}

double voronoi_distance(const NoiseContext& ctx, const Vec3& p, const NoiseParams& params) {
  return nearest_feature(ctx.subseed(NoiseGenerator::VoronoiDistance), p * params.scale).distance;
}

Vec3 voronoi_feature_point(const NoiseContext& ctx, NoiseGenerator which, std::int64_t i,
                           std::int64_t j, std::int64_t k) {
  return feature_in_cell(ctx.subseed(which), i, j, k);
}

double wave(const NoiseContext& ctx, const Vec3& p, const NoiseParams& params) {
  const Vec3 q = p * params.scale;
  double phase = dot(q, ctx.wave_axis());
  if (params.distortion > 0)
    phase += params.distortion * perlin_unit(ctx.subseed(NoiseGenerator::Wave), q, 2);
  return 0.5 + 0.5 * std::sin(2.0 * kPi * phase);
}

double radial_gradient(const Vec3& p, const Vec3& center, const Vec3& axis_u, const Vec3& axis_v) {
  const Vec3 d = p - center;
  double t = std::atan2(dot(d, axis_v), dot(d, axis_u)) / (2.0 * kPi);
  if (t < 0) t += 1.0;
  return t >= 1.0 ? 0.0 : t;
}

namespace {

// Zero k (any integer) of noisy_periodic, in units of 1/line_count.
double periodic_zero(std::uint64_t seed, std::int64_t k, int line_count, double jitter) {
  if (jitter == 0) return static_cast<double>(k);
  const std::int64_t n = line_count;
  const std::int64_t slot = ((k % n) + n) % n;
  const double offset = jitter * (unit_from_bits(mix64(seed ^ static_cast<std::uint64_t>(slot))) - 0.5);
  return static_cast<double>(k) + offset;
}

}  // namespace

double noisy_periodic(const NoiseContext& ctx, double u, int line_count, double jitter) {
  if (line_count < 1) throw Error(ErrorKind::OutOfRange, "line_count must be >= 1");
  if (!(jitter >= 0 && jitter < 1)) throw Error(ErrorKind::OutOfRange, "jitter must lie in [0, 1)");
  double wrapped = u - std::floor(u);
  const double t = wrapped * line_count;
  if (jitter == 0) return std::abs(std::sin(kPi * t));

  const std::uint64_t seed = ctx.subseed(NoiseGenerator::NoisyPeriodic);
  const auto base = static_cast<std::int64_t>(std::floor(t));
  // |offset| < 1/2, so the bracketing zeros are among base-1 .. base+2.
  double left = periodic_zero(seed, base - 1, line_count, jitter);
  double right = periodic_zero(seed, base + 2, line_count, jitter);
  for (std::int64_t k = base; k <= base + 1; ++k) {
    const double z = periodic_zero(seed, k, line_count, jitter);
    if (z <= t) left = std::max(left, z);
    else right = std::min(right, z);
  }
  return std::sin(kPi * (t - left) / (right - left));
}

std::vector<double> noisy_periodic_zeros(const NoiseContext& ctx, int line_count, double jitter) {
  const std::uint64_t seed = ctx.subseed(NoiseGenerator::NoisyPeriodic);
  std::vector<double> zeros;
  for (int k = 0; k < line_count; ++k) {
    double z = periodic_zero(seed, k, line_count, jitter) / line_count;
    z -= std::floor(z);
    zeros.push_back(z);
  }
  std::sort(zeros.begin(), zeros.end());
  return zeros;
}

}  // namespace carsynth
