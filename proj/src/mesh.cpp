#include "carsynth/mesh.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

#include "carsynth/error.hpp"
#include "json.hpp"

namespace carsynth {

using nlohmann::json;

std::string_view to_string(MaterialClass m) {
  switch (m) {
    case MaterialClass::Metal: return "metal";
    case MaterialClass::Glass: return "glass";
    case MaterialClass::Lamp: return "lamp";
    case MaterialClass::Other: return "other";
  }
  return "other";
}

MaterialClass material_class_from_string(std::string_view name) {
  if (name == "metal") return MaterialClass::Metal;
  if (name == "glass") return MaterialClass::Glass;
  if (name == "lamp") return MaterialClass::Lamp;
  if (name == "other") return MaterialClass::Other;
  throw Error(ErrorKind::ParseError, "unknown material class '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// PartRegistry

PartRegistry::PartRegistry(std::vector<PartInfo> parts) : parts_(std::move(parts)) {
  if (static_cast<int>(parts_.size()) != kPartCount)
    throw Error(ErrorKind::ConfigInvalid,
                "part registry needs exactly 27 entries, got " + std::to_string(parts_.size()));
  std::sort(parts_.begin(), parts_.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (parts_[i].id != static_cast<int>(i) + 1)
      throw Error(ErrorKind::ConfigInvalid, "part ids must be contiguous 1..27");
    if (parts_[i].name.empty()) throw Error(ErrorKind::ConfigInvalid, "part names must be non-empty");
    for (std::size_t j = 0; j < i; ++j)
      if (parts_[j].name == parts_[i].name)
        throw Error(ErrorKind::ConfigInvalid, "duplicate part name '" + parts_[i].name + "'");
  }
}

PartRegistry PartRegistry::defaults() {
  using M = MaterialClass;
  // Car taxonomy with the four wheels merged and the two plates merged.
  static const std::vector<std::pair<const char*, M>> kParts = {
      {"back_bumper", M::Metal},          {"back_left_door", M::Metal},
      {"back_left_window", M::Glass},     {"back_right_door", M::Metal},
      {"back_right_window", M::Glass},    {"back_windshield", M::Glass},
      {"front_bumper", M::Metal},         {"front_left_door", M::Metal},
      {"front_left_window", M::Glass},    {"front_right_door", M::Metal},
      {"front_right_window", M::Glass},   {"front_windshield", M::Glass},
      {"hood", M::Metal},                 {"left_frame", M::Metal},
      {"left_head_light", M::Lamp},       {"left_mirror", M::Metal},
      {"left_quarter_window", M::Glass},  {"left_tail_light", M::Lamp},
      {"right_frame", M::Metal},          {"right_head_light", M::Lamp},
      {"right_mirror", M::Metal},         {"right_quarter_window", M::Glass},
      {"right_tail_light", M::Lamp},      {"roof", M::Metal},
      {"trunk", M::Metal},                {"wheel", M::Other},
      {"license_plate", M::Other},
  };
  std::vector<PartInfo> parts;
  int id = 1;
  for (const auto& [name, material] : kParts) parts.push_back({id++, name, material});
  return PartRegistry(std::move(parts));
}

PartRegistry PartRegistry::from_json_text(std::string_view text) {
  try {
    const json doc = json::parse(text);
    std::vector<PartInfo> parts;
    for (const auto& entry : doc.at("parts"))
      parts.push_back({entry.at("id").get<int>(), entry.at("name").get<std::string>(),
                       material_class_from_string(entry.at("material").get<std::string>())});
    return PartRegistry(std::move(parts));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigInvalid, std::string("part registry: ") + e.what());
  }
}

PartRegistry PartRegistry::load(const std::filesystem::path& path) {
  return from_json_text(read_text_file(path));
}

std::string PartRegistry::to_json_text() const {
  json parts = json::array();
  for (const auto& p : parts_)
    parts.push_back({{"id", p.id}, {"name", p.name}, {"material", std::string(to_string(p.material))}});
  return json{{"parts", parts}}.dump(2) + "\n";
}

const PartInfo& PartRegistry::at(int id) const {
  if (!contains(id)) throw Error(ErrorKind::UnknownPart, "part id " + std::to_string(id));
  return parts_[static_cast<std::size_t>(id - 1)];
}

std::optional<int> PartRegistry::find(std::string_view name) const {
  for (const auto& p : parts_)
    if (p.name == name) return p.id;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// LabeledMesh

std::vector<Vec3> compute_vertex_normals(const std::vector<Vec3>& vertices,
                                         const std::vector<Triangle>& triangles) {
  std::vector<Vec3> sums(vertices.size());
  for (const auto& t : triangles) {
    // cross product length is twice the area: area weighting for free
    const Vec3 n = cross(vertices[t[1]] - vertices[t[0]], vertices[t[2]] - vertices[t[0]]);
    for (auto idx : t) sums[idx] += n;
  }
  for (auto& n : sums) {
    const double l = length(n);
    n = l > 0 ? n / l : Vec3{0, 0, 1};
  }
  return sums;
}

LabeledMesh LabeledMesh::build(std::vector<Vec3> vertices, const std::vector<Triangle>& triangles,
                               const std::vector<int>& triangle_parts, const PartRegistry& registry,
                               std::vector<Vec3> normals) {
  if (triangle_parts.size() != triangles.size())
    throw Error(ErrorKind::DegenerateGeometry, "one part id per triangle required");
  for (int part : triangle_parts)
    if (!registry.contains(part)) throw Error(ErrorKind::UnknownPart, "part id " + std::to_string(part));

  std::vector<std::size_t> order(triangles.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return triangle_parts[a] < triangle_parts[b]; });

  LabeledMesh mesh;
  mesh.vertices = std::move(vertices);
  mesh.triangles.reserve(triangles.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const int part = triangle_parts[order[i]];
    if (mesh.submeshes.empty() || mesh.submeshes.back().part_id != part)
      mesh.submeshes.push_back({i, 0, part});
    ++mesh.submeshes.back().triangle_count;
    mesh.triangles.push_back(triangles[order[i]]);
  }
  for (const auto& t : mesh.triangles)
    for (auto idx : t)
      if (idx >= mesh.vertices.size())
        throw Error(ErrorKind::DegenerateGeometry, "triangle index out of range");

  if (normals.empty()) {
    mesh.normals = compute_vertex_normals(mesh.vertices, mesh.triangles);
  } else {
    if (normals.size() != mesh.vertices.size())
      throw Error(ErrorKind::DegenerateGeometry, "normal count differs from vertex count");
    for (auto& n : normals) {
      const double l = length(n);
      n = l > 0 ? n / l : Vec3{0, 0, 1};
    }
    mesh.normals = std::move(normals);
  }
  mesh.update_bounding_radius();
  mesh.index_parts();
  return mesh;
}

int LabeledMesh::triangle_part(std::size_t tri) const {
  // submeshes are contiguous and sorted by first_triangle
  auto it = std::upper_bound(submeshes.begin(), submeshes.end(), tri,
                             [](std::size_t t, const Submesh& s) { return t < s.first_triangle; });
  if (it == submeshes.begin()) return 0;
  --it;
  return tri < it->first_triangle + it->triangle_count ? it->part_id : 0;
}

std::vector<int> LabeledMesh::part_ids() const {
  std::vector<int> ids;
  for (const auto& s : submeshes)
    if (s.triangle_count > 0 && (ids.empty() || ids.back() != s.part_id)) ids.push_back(s.part_id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

const std::vector<std::uint32_t>& LabeledMesh::part_vertices(int part_id) const {
  static const std::vector<std::uint32_t> kEmpty;
  if (part_id < 0 || static_cast<std::size_t>(part_id) >= part_vertex_lists.size()) return kEmpty;
  return part_vertex_lists[static_cast<std::size_t>(part_id)];
}

double LabeledMesh::part_area(int part_id) const {
  double area = 0;
  for (const auto& s : submeshes) {
    if (s.part_id != part_id) continue;
    for (std::size_t i = s.first_triangle; i < s.first_triangle + s.triangle_count; ++i) {
      const auto& t = triangles[i];
      area += 0.5 * length(cross(vertices[t[1]] - vertices[t[0]], vertices[t[2]] - vertices[t[0]]));
    }
  }
  return area;
}

void LabeledMesh::index_parts() {
  part_vertex_lists.assign(PartRegistry::kPartCount + 1, {});
  for (const auto& s : submeshes) {
    if (s.part_id < 0 || s.part_id > PartRegistry::kPartCount) continue;
    auto& list = part_vertex_lists[static_cast<std::size_t>(s.part_id)];
    for (std::size_t i = s.first_triangle; i < s.first_triangle + s.triangle_count; ++i)
      list.insert(list.end(), triangles[i].begin(), triangles[i].end());
  }
  for (auto& list : part_vertex_lists) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
}

void LabeledMesh::recompute_normals() { normals = compute_vertex_normals(vertices, triangles); }

void LabeledMesh::update_bounding_radius() {
  bounding_radius = 0;
  for (const auto& v : vertices) bounding_radius = std::max(bounding_radius, length(v));
}

void LabeledMesh::validate(const PartRegistry& registry) const {
  std::size_t covered = 0;
  for (const auto& s : submeshes) {
    if (s.first_triangle != covered)
      throw Error(ErrorKind::DegenerateGeometry, "submeshes must tile the triangle list");
    if (!registry.contains(s.part_id))
      throw Error(ErrorKind::UnknownPart, "submesh part id " + std::to_string(s.part_id));
    covered += s.triangle_count;
  }
  if (covered != triangles.size())
    throw Error(ErrorKind::DegenerateGeometry, "every triangle must belong to one submesh");
  for (const auto& t : triangles)
    for (auto idx : t)
      if (idx >= vertices.size()) throw Error(ErrorKind::DegenerateGeometry, "triangle index out of range");
  if (normals.size() != vertices.size())
    throw Error(ErrorKind::DegenerateGeometry, "normal count differs from vertex count");
  for (const auto& n : normals)
    if (std::abs(length(n) - 1.0) > 1e-6)
      throw Error(ErrorKind::DegenerateGeometry, "vertex normal is not unit length");
}

// ---------------------------------------------------------------------------
// OBJ

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_double(std::string_view s, std::size_t line) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw Error(ErrorKind::ParseError, "bad number '" + std::string(s) + "' on line " + std::to_string(line));
  return v;
}

long parse_index(std::string_view s, std::size_t count, std::size_t line) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || v == 0)
    throw Error(ErrorKind::ParseError, "bad index '" + std::string(s) + "' on line " + std::to_string(line));
  const long resolved = v > 0 ? v - 1 : static_cast<long>(count) + v;
  if (resolved < 0 || static_cast<std::size_t>(resolved) >= count)
    throw Error(ErrorKind::ParseError, "index out of range on line " + std::to_string(line));
  return resolved;
}

void append_double(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

}  // namespace

ObjData parse_obj(std::string_view text) {
  ObjData data;
  std::vector<Vec3> normals;
  std::vector<Vec3> normal_sums;
  std::vector<bool> has_normal;
  std::map<std::string, std::size_t, std::less<>> group_index;
  std::size_t current = std::string::npos;

  auto select_group = [&](std::string_view name) {
    auto it = group_index.find(name);
    if (it == group_index.end()) {
      it = group_index.emplace(std::string(name), data.groups.size()).first;
      data.groups.push_back({std::string(name), {}});
    }
    current = it->second;
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto tokens = split_ws(line);
    const std::string_view tag = tokens[0];
    if (tag == "v") {
      if (tokens.size() < 4) throw Error(ErrorKind::ParseError, "short vertex on line " + std::to_string(line_no));
      data.positions.push_back({parse_double(tokens[1], line_no), parse_double(tokens[2], line_no),
                                parse_double(tokens[3], line_no)});
    } else if (tag == "vn") {
      if (tokens.size() < 4) throw Error(ErrorKind::ParseError, "short normal on line " + std::to_string(line_no));
      normals.push_back({parse_double(tokens[1], line_no), parse_double(tokens[2], line_no),
                         parse_double(tokens[3], line_no)});
    } else if (tag == "g" || tag == "o") {
      select_group(tokens.size() > 1 ? trim(line.substr(1)) : std::string_view("default"));
    } else if (tag == "f") {
      if (tokens.size() < 4) throw Error(ErrorKind::ParseError, "face needs 3+ vertices on line " + std::to_string(line_no));
      if (current == std::string::npos) select_group("default");
      normal_sums.resize(data.positions.size());
      has_normal.resize(data.positions.size(), false);
      std::vector<std::uint32_t> poly;
      for (std::size_t i = 1; i < tokens.size(); ++i) {
        const std::string_view ref = tokens[i];
        const auto slash = ref.find('/');
        const long vi = parse_index(ref.substr(0, slash), data.positions.size(), line_no);
        poly.push_back(static_cast<std::uint32_t>(vi));
        if (slash != std::string_view::npos) {
          const auto slash2 = ref.find('/', slash + 1);
          if (slash2 != std::string_view::npos && slash2 + 1 < ref.size()) {
            const long ni = parse_index(ref.substr(slash2 + 1), normals.size(), line_no);
            normal_sums[static_cast<std::size_t>(vi)] += normals[static_cast<std::size_t>(ni)];
            has_normal[static_cast<std::size_t>(vi)] = true;
          }
        }
      }
      for (std::size_t i = 1; i + 1 < poly.size(); ++i)
        data.groups[current].triangles.push_back({poly[0], poly[i], poly[i + 1]});
    }
    // vt, usemtl, mtllib, s, l: ignored
  }

  has_normal.resize(data.positions.size(), false);
  normal_sums.resize(data.positions.size());
  const bool any = std::any_of(has_normal.begin(), has_normal.end(), [](bool b) { return b; });
  if (any) {
    // Partial normal data: fill the gaps from the geometry.
    std::vector<Triangle> all;
    for (const auto& g : data.groups) all.insert(all.end(), g.triangles.begin(), g.triangles.end());
    const auto computed = compute_vertex_normals(data.positions, all);
    data.vertex_normals.resize(data.positions.size());
    for (std::size_t i = 0; i < data.positions.size(); ++i) {
      const double l = length(normal_sums[i]);
      data.vertex_normals[i] = has_normal[i] && l > 0 ? normal_sums[i] / l : computed[i];
    }
  }
  return data;
}

LabelMap LabelMap::from_json_text(std::string_view text) {
  try {
    const json doc = json::parse(text);
    LabelMap map;
    for (const auto& [group, part] : doc.at("groups").items()) map.groups[group] = part.get<std::string>();
    if (doc.contains("up_axis")) {
      const auto axis = doc.at("up_axis").get<std::string>();
      if (axis != "z" && axis != "y") throw Error(ErrorKind::ParseError, "up_axis must be 'y' or 'z'");
      map.up_axis = axis[0];
    }
    return map;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("label file: ") + e.what());
  }
}

std::string LabelMap::to_json_text() const {
  json doc;
  doc["groups"] = groups;
  if (up_axis != 'z') doc["up_axis"] = std::string(1, up_axis);
  return doc.dump(2) + "\n";
}

LabeledMesh labeled_mesh_from_text(std::string_view obj_text, const LabelMap& labels,
                                   const PartRegistry& registry) {
  ObjData obj = parse_obj(obj_text);

  std::vector<Triangle> triangles;
  std::vector<int> parts;
  for (const auto& g : obj.groups) {
    if (g.triangles.empty()) continue;
    auto it = labels.groups.find(g.name);
    if (it == labels.groups.end())
      throw Error(ErrorKind::MissingLabel, "OBJ group '" + g.name + "' has no label");
    const auto part = registry.find(it->second);
    if (!part) throw Error(ErrorKind::UnknownPart, "label '" + it->second + "' is not in the registry");
    triangles.insert(triangles.end(), g.triangles.begin(), g.triangles.end());
    parts.insert(parts.end(), g.triangles.size(), *part);
  }
  if (triangles.empty()) throw Error(ErrorKind::DegenerateGeometry, "mesh has no faces");

  auto& positions = obj.positions;
  auto& normals = obj.vertex_normals;
  if (labels.up_axis == 'y') {
    // (x, y, z) y-up -> (x, -z, y) z-up
    for (auto& p : positions) p = {p.x, -p.z, p.y};
    for (auto& n : normals) n = {n.x, -n.z, n.y};
  }

  double area = 0;
  Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
  for (const auto& t : triangles) {
    area += length(cross(positions[t[1]] - positions[t[0]], positions[t[2]] - positions[t[0]]));
    for (auto idx : t) {
      lo = vmin(lo, positions[idx]);
      hi = vmax(hi, positions[idx]);
    }
  }
  const double extent = max_component(hi - lo);
  if (!(area > 0) || !(extent > 0)) throw Error(ErrorKind::DegenerateGeometry, "model has zero area");

  const Vec3 center = (lo + hi) * 0.5;
  const double scale = kNormalizedLength / extent;
  // Already-normalized input stays bit-identical (round trips).
  const bool identity = std::abs(scale - 1.0) < 1e-12 && length(center) < 1e-12;
  if (!identity)
    for (auto& p : positions) p = (p - center) * scale;

  return LabeledMesh::build(std::move(positions), triangles, parts, registry, std::move(normals));
}

LabeledMesh load_labeled_mesh(const std::filesystem::path& geometry_path,
                              const std::filesystem::path& labels_path,
                              const PartRegistry& registry) {
  const auto labels = LabelMap::from_json_text(read_text_file(labels_path));
  return labeled_mesh_from_text(read_text_file(geometry_path), labels, registry);
}

std::string mesh_to_obj_text(const LabeledMesh& mesh, const PartRegistry& registry) {
  std::string out;
  out.reserve(mesh.vertices.size() * 96 + mesh.triangles.size() * 32);
  auto put_vec = [&](const char* tag, const Vec3& v) {
    out += tag;
    for (int i = 0; i < 3; ++i) {
      out += ' ';
      append_double(out, v[i]);
    }
    out += '\n';
  };
  for (const auto& v : mesh.vertices) put_vec("v", v);
  for (const auto& n : mesh.normals) put_vec("vn", n);
  for (const auto& s : mesh.submeshes) {
    out += "g " + registry.at(s.part_id).name + "\n";
    for (std::size_t i = s.first_triangle; i < s.first_triangle + s.triangle_count; ++i) {
      out += 'f';
      for (auto idx : mesh.triangles[i]) {
        const auto k = std::to_string(idx + 1);
        out += ' ' + k + "//" + k;
      }
      out += '\n';
    }
  }
  return out;
}

void save_labeled_mesh(const LabeledMesh& mesh, const PartRegistry& registry,
                       const std::filesystem::path& geometry_path,
                       const std::filesystem::path& labels_path) {
  LabelMap labels;
  for (const auto& s : mesh.submeshes) {
    const auto& name = registry.at(s.part_id).name;
    labels.groups[name] = name;
  }
  write_text_file(geometry_path, mesh_to_obj_text(mesh, registry));
  write_text_file(labels_path, labels.to_json_text());
}

VertexSample sample_part_vertex(const LabeledMesh& mesh, int part_id, Rng& rng) {
  const auto& list = mesh.part_vertices(part_id);
  if (list.empty()) throw Error(ErrorKind::EmptyPart, "part " + std::to_string(part_id) + " has no vertices");
  const auto idx = list[rng.index(list.size())];
  return {idx, mesh.vertices[idx]};
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorKind::IoFailure, "short write to " + path.string());
}

}  // namespace carsynth
