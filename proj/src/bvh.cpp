#include "carsynth/bvh.hpp"

#include <algorithm>
#include <array>
#include <numeric>

namespace carsynth {
namespace {

constexpr int kBins = 12;
constexpr std::uint32_t kLeafSize = 4;
// traversal stacks hold at most depth + 1 entries
constexpr int kMaxDepth = 60;

bool hit_box(const Aabb& b, const Vec3& origin, const Vec3& inv_dir, double t_min, double t_max) {
  for (int a = 0; a < 3; ++a) {
    double t0 = (b.lo[a] - origin[a]) * inv_dir[a];
    double t1 = (b.hi[a] - origin[a]) * inv_dir[a];
    if (inv_dir[a] < 0) std::swap(t0, t1);
    // NaN from 0 * inf compares false and leaves the interval untouched
    t_min = t0 > t_min ? t0 : t_min;
    t_max = t1 < t_max ? t1 : t_max;
    if (t_max < t_min) return false;
  }
  return true;
}

}  // namespace

Bvh::Bvh(const LabeledMesh& mesh) : positions_(mesh.vertices), triangles_(mesh.triangles) {
  const auto n = static_cast<std::uint32_t>(triangles_.size());
  if (n == 0) return;
  std::vector<Aabb> boxes(n);
  std::vector<Vec3> centroids(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (auto idx : triangles_[i]) boxes[i].expand(positions_[idx]);
    centroids[i] = (boxes[i].lo + boxes[i].hi) * 0.5;
  }
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * n / kLeafSize + 1);
  build_node(0, n, boxes, centroids, 0);
}

std::uint32_t Bvh::build_node(std::uint32_t first, std::uint32_t count, std::vector<Aabb>& boxes,
                              std::vector<Vec3>& centroids, int depth) {
  const auto index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back({});
  Aabb box, cbox;
  for (std::uint32_t i = first; i < first + count; ++i) {
    box.expand(boxes[order_[i]]);
    cbox.expand(centroids[order_[i]]);
  }
  nodes_[index].box = box;

  auto make_leaf = [&] {
    nodes_[index].first = first;
    nodes_[index].count = count;
    return index;
  };
  if (count <= kLeafSize || depth >= kMaxDepth) return make_leaf();

  const Vec3 extent = cbox.hi - cbox.lo;
  int axis = 0;
  if (extent.y > extent[axis]) axis = 1;
  if (extent.z > extent[axis]) axis = 2;
  if (!(extent[axis] > 0)) return make_leaf();

  struct Bin {
    Aabb box;
    std::uint32_t count = 0;
  };
  std::array<Bin, kBins> bins{};
  const double scale = kBins / extent[axis];
  auto bin_of = [&](std::uint32_t prim) {
    const int b = static_cast<int>((centroids[prim][axis] - cbox.lo[axis]) * scale);
    return std::clamp(b, 0, kBins - 1);
  };
  for (std::uint32_t i = first; i < first + count; ++i) {
    auto& bin = bins[static_cast<std::size_t>(bin_of(order_[i]))];
    bin.box.expand(boxes[order_[i]]);
    ++bin.count;
  }

  std::array<double, kBins - 1> left_cost{};
  Aabb acc;
  std::uint32_t acc_count = 0;
  for (int i = 0; i < kBins - 1; ++i) {
    acc.expand(bins[static_cast<std::size_t>(i)].box);
    acc_count += bins[static_cast<std::size_t>(i)].count;
    left_cost[static_cast<std::size_t>(i)] = acc.surface_area() * acc_count;
  }
  acc = Aabb{};
  acc_count = 0;
  double best_cost = 1e300;
  int best_split = -1;
  for (int i = kBins - 1; i > 0; --i) {
    acc.expand(bins[static_cast<std::size_t>(i)].box);
    acc_count += bins[static_cast<std::size_t>(i)].count;
    const double cost = left_cost[static_cast<std::size_t>(i - 1)] + acc.surface_area() * acc_count;
    if (cost < best_cost) {
      best_cost = cost;
      best_split = i;
    }
  }

  const double leaf_cost = box.surface_area() * count;
  if (best_split < 0 || (count <= 16 && best_cost >= leaf_cost)) return make_leaf();

  auto mid_it = std::partition(order_.begin() + first, order_.begin() + first + count,
                               [&](std::uint32_t prim) { return bin_of(prim) < best_split; });
  auto mid = static_cast<std::uint32_t>(mid_it - order_.begin());
  if (mid == first || mid == first + count) {
    mid = first + count / 2;
    std::nth_element(order_.begin() + first, order_.begin() + mid, order_.begin() + first + count,
                     [&](std::uint32_t a, std::uint32_t b) { return centroids[a][axis] < centroids[b][axis]; });
  }

  build_node(first, mid - first, boxes, centroids, depth + 1);  // left child is index + 1
  const std::uint32_t right = build_node(mid, first + count - mid, boxes, centroids, depth + 1);
  nodes_[index].first = right;
  nodes_[index].count = 0;
  return index;
}

bool Bvh::hit_triangle(std::uint32_t tri, const Ray& ray, double t_max, Hit& hit) const {
  const auto& t = triangles_[tri];
  const Vec3& p0 = positions_[t[0]];
  const Vec3 e1 = positions_[t[1]] - p0;
  const Vec3 e2 = positions_[t[2]] - p0;
  const Vec3 pv = cross(ray.direction, e2);
  const double det = dot(e1, pv);
  if (std::abs(det) < 1e-300) return false;
  const double inv = 1.0 / det;
  const Vec3 tv = ray.origin - p0;
  const double b1 = dot(tv, pv) * inv;
  // Slack on the edges so rays through a shared edge cannot slip between
  // both neighbours on rounding.
  constexpr double kEdgeSlack = 1e-10;
  if (b1 < -kEdgeSlack || b1 > 1.0 + kEdgeSlack) return false;
  const Vec3 qv = cross(tv, e1);
  const double b2 = dot(ray.direction, qv) * inv;
  if (b2 < -kEdgeSlack || b1 + b2 > 1.0 + kEdgeSlack) return false;
  const double dist = dot(e2, qv) * inv;
  if (dist <= ray.t_min || dist >= t_max) return false;
  hit = {tri, dist, b1, b2};
  return true;
}

std::optional<Hit> Bvh::intersect(const Ray& ray) const {
  if (nodes_.empty()) return std::nullopt;
  const Vec3 inv{1.0 / ray.direction.x, 1.0 / ray.direction.y, 1.0 / ray.direction.z};
  std::optional<Hit> best;
  double t_max = ray.t_max;
  std::array<std::uint32_t, 64> stack{};
  int sp = 0;
  stack[static_cast<std::size_t>(sp++)] = 0;
  while (sp > 0) {
    const Node& node = nodes_[stack[static_cast<std::size_t>(--sp)]];
    if (!hit_box(node.box, ray.origin, inv, ray.t_min, t_max)) continue;
    if (node.count > 0) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        Hit h;
        if (hit_triangle(order_[i], ray, t_max, h)) {
          best = h;
          t_max = h.t;
        }
      }
    } else {
      const auto self = static_cast<std::uint32_t>(&node - nodes_.data());
      stack[static_cast<std::size_t>(sp++)] = node.first;
      stack[static_cast<std::size_t>(sp++)] = self + 1;
    }
  }
  return best;
}

bool Bvh::occluded(const Ray& ray) const {
  if (nodes_.empty()) return false;
  const Vec3 inv{1.0 / ray.direction.x, 1.0 / ray.direction.y, 1.0 / ray.direction.z};
  std::array<std::uint32_t, 64> stack{};
  int sp = 0;
  stack[static_cast<std::size_t>(sp++)] = 0;
  while (sp > 0) {
    const Node& node = nodes_[stack[static_cast<std::size_t>(--sp)]];
    if (!hit_box(node.box, ray.origin, inv, ray.t_min, ray.t_max)) continue;
    if (node.count > 0) {
      Hit h;
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i)
        if (hit_triangle(order_[i], ray, ray.t_max, h)) return true;
    } else {
      const auto self = static_cast<std::uint32_t>(&node - nodes_.data());
      stack[static_cast<std::size_t>(sp++)] = node.first;
      stack[static_cast<std::size_t>(sp++)] = self + 1;
    }
  }
  return false;
}

}  // namespace carsynth
