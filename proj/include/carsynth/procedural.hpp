#pragma once

#include <string_view>
#include <vector>

#include "carsynth/math.hpp"
#include "carsynth/mesh.hpp"

namespace carsynth {

/// Generalized superellipsoid
///   (|u/a_u|^q + |w/a_w|^q)^(p/q) + |s/a_s|^p = 1
/// where s is the coordinate along `axis` and (u, w) the other two.
/// p = q = 2 gives an ellipsoid.
struct Superellipsoid {
  Vec3 center;
  Vec3 semi_axes{1, 1, 1};
  int axis = 2;
  double p = 2.0;
  double q = 2.0;

  /// < 1 inside, 1 on the surface, > 1 outside.
  double implicit(const Vec3& x) const;
};

struct RawMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
};

/// Surface mesh with roughly uniform edge length `spacing`: a box grid
/// projected radially onto the surface, shared edges welded, triangles
/// wound outward.
RawMesh tessellate(const Superellipsoid& shape, double spacing);

/// Sphere labeled entirely as `part_id`. Not normalized.
LabeledMesh make_sphere_mesh(double radius, int part_id, const PartRegistry& registry,
                             double spacing = 0.05);

enum class CarStyle { Sedan, Hatchback, Suv, Coupe };

inline constexpr CarStyle kCarStyles[] = {CarStyle::Sedan, CarStyle::Hatchback, CarStyle::Suv,
                                          CarStyle::Coupe};

std::string_view to_string(CarStyle style);
CarStyle car_style_from_string(std::string_view name);

/// Part-labeled car built from superellipsoid body, cabin, wheels and
/// mirrors, normalized like a loaded model. Every default part is present.
/// Requires the registry to contain the default part names.
LabeledMesh make_procedural_car(CarStyle style, const PartRegistry& registry, double spacing = 0.05);

}  // namespace carsynth
