#include "carsynth/procedural.hpp"

#include <cmath>
#include <map>
#include <string>

#include "carsynth/error.hpp"

namespace carsynth {

double Superellipsoid::implicit(const Vec3& x) const {
  const Vec3 d = x - center;
  const int u_axis = (axis + 1) % 3, w_axis = (axis + 2) % 3;
  const double s = std::abs(d[axis] / semi_axes[axis]);
  const double u = std::abs(d[u_axis] / semi_axes[u_axis]);
  const double w = std::abs(d[w_axis] / semi_axes[w_axis]);
  return std::pow(std::pow(u, q) + std::pow(w, q), p / q) + std::pow(s, p);
}

RawMesh tessellate(const Superellipsoid& shape, double spacing) {
  if (!(spacing > 0)) throw Error(ErrorKind::OutOfRange, "spacing must be positive");
  const Vec3& a = shape.semi_axes;
  std::array<int, 3> n{};
  for (int i = 0; i < 3; ++i) n[static_cast<std::size_t>(i)] = std::max(2, static_cast<int>(std::ceil(2 * a[i] / spacing)));

  RawMesh mesh;
  std::map<std::array<double, 3>, std::uint32_t> welded;
  auto vertex = [&](const Vec3& box_point) {
    const std::array<double, 3> key{box_point.x, box_point.y, box_point.z};
    auto it = welded.find(key);
    if (it != welded.end()) return it->second;
    // F is homogeneous of degree p, so F(s b) = 1 at s = F(b)^(-1/p).
    const double f = shape.implicit(shape.center + box_point);
    const Vec3 p = shape.center + box_point * std::pow(f, -1.0 / shape.p);
    const auto idx = static_cast<std::uint32_t>(mesh.vertices.size());
    mesh.vertices.push_back(p);
    welded.emplace(key, idx);
    return idx;
  };
  auto coord = [&](int axis, int i) {
    const double half = a[axis];
    return -half + 2.0 * half * i / n[static_cast<std::size_t>(axis)];
  };

  for (int face_axis = 0; face_axis < 3; ++face_axis) {
    const int b_axis = (face_axis + 1) % 3, c_axis = (face_axis + 2) % 3;
    for (double sign : {-1.0, 1.0}) {
      std::vector<std::uint32_t> grid;
      const int nb = n[static_cast<std::size_t>(b_axis)], nc = n[static_cast<std::size_t>(c_axis)];
      grid.reserve(static_cast<std::size_t>((nb + 1) * (nc + 1)));
      for (int j = 0; j <= nc; ++j)
        for (int i = 0; i <= nb; ++i) {
          Vec3 bp;
          bp[face_axis] = sign * a[face_axis];
          bp[b_axis] = coord(b_axis, i);
          bp[c_axis] = coord(c_axis, j);
          grid.push_back(vertex(bp));
        }
      auto at = [&](int i, int j) { return grid[static_cast<std::size_t>(j * (nb + 1) + i)]; };
      for (int j = 0; j < nc; ++j)
        for (int i = 0; i < nb; ++i) {
          const std::uint32_t q0 = at(i, j), q1 = at(i + 1, j), q2 = at(i + 1, j + 1), q3 = at(i, j + 1);
          for (Triangle t : {Triangle{q0, q1, q2}, Triangle{q0, q2, q3}}) {
            const auto& v = mesh.vertices;
            const Vec3 normal = cross(v[t[1]] - v[t[0]], v[t[2]] - v[t[0]]);
            if (length(normal) == 0) continue;
            const Vec3 centroid = (v[t[0]] + v[t[1]] + v[t[2]]) / 3.0;
            if (dot(normal, centroid - shape.center) < 0) std::swap(t[1], t[2]);
            mesh.triangles.push_back(t);
          }
        }
    }
  }
  return mesh;
}

LabeledMesh make_sphere_mesh(double radius, int part_id, const PartRegistry& registry, double spacing) {
  Superellipsoid sphere{{0, 0, 0}, {radius, radius, radius}, 2, 2.0, 2.0};
  RawMesh raw = tessellate(sphere, spacing);
  std::vector<int> parts(raw.triangles.size(), part_id);
  // Analytic normals are exact for a sphere.
  std::vector<Vec3> normals;
  normals.reserve(raw.vertices.size());
  for (const auto& v : raw.vertices) normals.push_back(normalize(v));
  return LabeledMesh::build(std::move(raw.vertices), raw.triangles, parts, registry, std::move(normals));
}

std::string_view to_string(CarStyle style) {
  switch (style) {
    case CarStyle::Sedan: return "sedan";
    case CarStyle::Hatchback: return "hatchback";
    case CarStyle::Suv: return "suv";
    case CarStyle::Coupe: return "coupe";
  }
  return "sedan";
}

CarStyle car_style_from_string(std::string_view name) {
  for (auto s : kCarStyles)
    if (name == to_string(s)) return s;
  throw Error(ErrorKind::ConfigInvalid, "unknown built-in model '" + std::string(name) + "'");
}

namespace {

struct CarDimensions {
  double length, width, body_height, clearance;
  double body_q, body_p;
  double cabin_x, cabin_length, cabin_width, cabin_height;
  double cabin_q, cabin_p;
  double wheel_radius, wheel_inset;
};

CarDimensions dimensions(CarStyle style) {
  switch (style) {
    case CarStyle::Sedan: return {4.6, 1.8, 0.75, 0.28, 5, 4, -0.25, 2.5, 1.6, 0.62, 3, 2.4, 0.34, 0.85};
    case CarStyle::Hatchback: return {4.0, 1.75, 0.78, 0.28, 5, 4, -0.45, 2.6, 1.58, 0.66, 3, 2.8, 0.33, 0.75};
    case CarStyle::Suv: return {4.7, 1.9, 0.95, 0.36, 6, 5, -0.35, 3.2, 1.74, 0.75, 4, 3.2, 0.38, 0.9};
    case CarStyle::Coupe: return {4.4, 1.8, 0.66, 0.26, 5, 4, -0.2, 2.1, 1.55, 0.55, 3, 2.2, 0.33, 0.85};
  }
  return dimensions(CarStyle::Sedan);
}

class PartIds {
 public:
  explicit PartIds(const PartRegistry& registry) : registry_(registry) {}
  int operator()(const std::string& name) const {
    const auto id = registry_.find(name);
    if (!id) throw Error(ErrorKind::UnknownPart, "built-in models need part '" + name + "'");
    return *id;
  }
  int sided(const char* left, const char* right, double y) const { return (*this)(y >= 0 ? left : right); }

 private:
  const PartRegistry& registry_;
};

}  // namespace

LabeledMesh make_procedural_car(CarStyle style, const PartRegistry& registry, double spacing) {
  const CarDimensions d = dimensions(style);
  const PartIds id(registry);

  const double hx = d.length / 2, hy = d.width / 2;
  const double body_top = d.clearance + d.body_height;
  const double cabin_half = d.cabin_length / 2;

  const Superellipsoid body{{0, 0, d.clearance + d.body_height / 2}, {hx, hy, d.body_height / 2}, 2,
                            d.body_p, d.body_q};
  const Superellipsoid cabin{{d.cabin_x, 0, body_top - 0.05},
                             {cabin_half, d.cabin_width / 2, d.cabin_height + 0.05}, 2, d.cabin_p, d.cabin_q};
  const double wheel_x = hx - d.wheel_inset, wheel_y = hy - 0.13;
  const double mirror_x = d.cabin_x + 0.72 * cabin_half;

  struct Component {
    Superellipsoid shape;
    enum Kind { Body, Cabin, Wheel, Mirror } kind;
  };
  std::vector<Component> components{{body, Component::Body}, {cabin, Component::Cabin}};
  for (double sx : {-1.0, 1.0})
    for (double sy : {-1.0, 1.0})
      components.push_back({{{sx * wheel_x, sy * wheel_y, d.wheel_radius}, {d.wheel_radius, 0.12, d.wheel_radius}, 1, 8.0, 2.0},
                            Component::Wheel});
  for (double sy : {-1.0, 1.0})
    components.push_back({{{mirror_x, sy * (d.cabin_width / 2 + 0.16), body_top + 0.1}, {0.07, 0.1, 0.06}, 2, 3.0, 3.0},
                          Component::Mirror});

  // Door split points along x, tied to the cabin.
  const double a_base = d.cabin_x + 0.8 * cabin_half;
  const double b_pillar = d.cabin_x + 0.05 * cabin_half;
  const double c_base = d.cabin_x - 0.65 * cabin_half;

  auto body_label = [&](const Vec3& c, const Vec3& n) {
    const double z_rel = (c.z - d.clearance) / d.body_height;
    if (n.z < -0.5) return id.sided("left_frame", "right_frame", c.y);
    if (std::abs(n.x) > 0.45 && std::abs(n.y) < 0.8) {
      const bool front = n.x > 0;
      if (std::abs(c.y) > hy - 0.48 && z_rel > 0.55)
        return front ? id.sided("left_head_light", "right_head_light", c.y)
                     : id.sided("left_tail_light", "right_tail_light", c.y);
      if (std::abs(c.y) < 0.26 && z_rel > 0.15 && z_rel < 0.45) return id("license_plate");
      return id(front ? "front_bumper" : "back_bumper");
    }
    if (n.z > 0.5) {
      if (c.x > d.cabin_x + cabin_half * 0.9) return id("hood");
      if (c.x < d.cabin_x - cabin_half * 0.9) return id("trunk");
      return id("roof");
    }
    if (z_rel > 0.2) {
      if (c.x >= b_pillar && c.x < a_base) return id.sided("front_left_door", "front_right_door", c.y);
      if (c.x >= c_base && c.x < b_pillar) return id.sided("back_left_door", "back_right_door", c.y);
    }
    return id.sided("left_frame", "right_frame", c.y);
  };

  auto cabin_label = [&](const Vec3& c, const Vec3& n) {
    if (std::abs(n.y) < 0.55) {
      if (n.z > 0.8) return id("roof");
      return id(n.x > 0 ? "front_windshield" : "back_windshield");
    }
    const double t = (c.x - d.cabin_x) / cabin_half;
    const bool pillar = std::abs(t - 0.05) < 0.05 || std::abs(t + 0.65) < 0.05;
    if (pillar || c.z < body_top + 0.06) return id.sided("left_frame", "right_frame", c.y);
    if (t > 0.05) return id.sided("front_left_window", "front_right_window", c.y);
    if (t > -0.65) return id.sided("back_left_window", "back_right_window", c.y);
    return id.sided("left_quarter_window", "right_quarter_window", c.y);
  };

  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::vector<int> parts;
  for (std::size_t ci = 0; ci < components.size(); ++ci) {
    const auto& comp = components[ci];
    RawMesh raw = tessellate(comp.shape, spacing);
    const auto offset = static_cast<std::uint32_t>(vertices.size());
    vertices.insert(vertices.end(), raw.vertices.begin(), raw.vertices.end());
    for (const auto& t : raw.triangles) {
      const Vec3& p0 = raw.vertices[t[0]];
      const Vec3& p1 = raw.vertices[t[1]];
      const Vec3& p2 = raw.vertices[t[2]];
      // Drop faces buried inside another solid component.
      bool buried = false;
      for (std::size_t oj = 0; oj < components.size() && !buried; ++oj) {
        if (oj == ci) continue;
        const auto& other = components[oj].shape;
        buried = other.implicit(p0) < 1 - 1e-9 && other.implicit(p1) < 1 - 1e-9 && other.implicit(p2) < 1 - 1e-9;
      }
      if (buried) continue;
      const Vec3 c = (p0 + p1 + p2) / 3.0;
      const Vec3 n = normalize(cross(p1 - p0, p2 - p0));
      int part = 0;
      switch (comp.kind) {
        case Component::Body: part = body_label(c, n); break;
        case Component::Cabin: part = cabin_label(c, n); break;
        case Component::Wheel: part = id("wheel"); break;
        case Component::Mirror: part = id.sided("left_mirror", "right_mirror", c.y); break;
      }
      triangles.push_back({t[0] + offset, t[1] + offset, t[2] + offset});
      parts.push_back(part);
    }
  }

  // Same normalization as loaded models: centered box, 4.5-unit longest axis.
  Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
  for (const auto& v : vertices) {
    lo = vmin(lo, v);
    hi = vmax(hi, v);
  }
  const Vec3 center = (lo + hi) * 0.5;
  const double scale = kNormalizedLength / max_component(hi - lo);
  for (auto& v : vertices) v = (v - center) * scale;

  return LabeledMesh::build(std::move(vertices), triangles, parts, registry);
}

}  // namespace carsynth
