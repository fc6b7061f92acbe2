#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "carsynth/math.hpp"
#include "carsynth/mesh.hpp"

namespace carsynth {

struct Ray {
  Vec3 origin;
  Vec3 direction;  // need not be normalized; t is in units of |direction|
  double t_min = 1e-9;
  double t_max = std::numeric_limits<double>::infinity();
};

struct Hit {
  std::uint32_t triangle = 0;
  double t = 0;
  double b1 = 0, b2 = 0;  // barycentrics of vertices 1 and 2
};

struct Aabb {
  Vec3 lo{1e300, 1e300, 1e300};
  Vec3 hi{-1e300, -1e300, -1e300};

  void expand(const Vec3& p) {
    lo = vmin(lo, p);
    hi = vmax(hi, p);
  }
  void expand(const Aabb& b) {
    lo = vmin(lo, b.lo);
    hi = vmax(hi, b.hi);
  }
  double surface_area() const {
    const Vec3 d = hi - lo;
    if (d.x < 0) return 0;
    return 2.0 * (d.x * d.y + d.y * d.z + d.z * d.x);
  }
};

/// Binned-SAH bounding volume hierarchy over the triangles of a mesh. Holds a
/// copy of the vertex positions it was built from.
class Bvh {
 public:
  Bvh() = default;
  explicit Bvh(const LabeledMesh& mesh);

  std::optional<Hit> intersect(const Ray& ray) const;
  bool occluded(const Ray& ray) const;

  bool empty() const noexcept { return nodes_.empty(); }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  const Aabb& bounds() const { return nodes_.front().box; }

 private:
  struct Node {
    Aabb box;
    std::uint32_t first = 0;  // first primitive (leaf) or right child (inner)
    std::uint32_t count = 0;  // primitives in a leaf, 0 for inner nodes
  };

  std::uint32_t build_node(std::uint32_t first, std::uint32_t count, std::vector<Aabb>& boxes,
                           std::vector<Vec3>& centroids, int depth);
  bool hit_triangle(std::uint32_t tri, const Ray& ray, double t_max, Hit& hit) const;

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> order_;
  std::vector<Vec3> positions_;
  std::vector<Triangle> triangles_;
};

}  // namespace carsynth
