#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "carsynth/math.hpp"
#include "carsynth/rng.hpp"

namespace carsynth {

enum class MaterialClass : std::uint8_t { Metal, Glass, Lamp, Other };

std::string_view to_string(MaterialClass m);
MaterialClass material_class_from_string(std::string_view name);

struct PartInfo {
  int id = 0;
  std::string name;
  MaterialClass material = MaterialClass::Other;
};

/// The 27-entry part taxonomy. Id 0 is reserved for background.
class PartRegistry {
 public:
  static constexpr int kPartCount = 27;

  /// Taxonomy shipped with the engine (data/parts.json holds the same list).
  static PartRegistry defaults();
  static PartRegistry from_json_text(std::string_view text);
  static PartRegistry load(const std::filesystem::path& path);

  explicit PartRegistry(std::vector<PartInfo> parts);

  std::string to_json_text() const;

  const std::vector<PartInfo>& parts() const noexcept { return parts_; }
  bool contains(int id) const noexcept { return id >= 1 && id <= static_cast<int>(parts_.size()); }
  const PartInfo& at(int id) const;
  MaterialClass material(int id) const { return at(id).material; }
  std::optional<int> find(std::string_view name) const;

 private:
  std::vector<PartInfo> parts_;
};

using Triangle = std::array<std::uint32_t, 3>;

struct Submesh {
  std::size_t first_triangle = 0;
  std::size_t triangle_count = 0;
  int part_id = 0;
};

/// Triangle mesh whose triangles are grouped into part-labeled submeshes.
/// Submeshes are contiguous and ordered by ascending part id.
struct LabeledMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::vector<Vec3> normals;  // per vertex, unit length
  std::vector<Submesh> submeshes;
  double bounding_radius = 0;  // max |v| about the origin

  /// Builds a mesh from unsorted per-triangle part ids. Triangles are
  /// reordered (stably) into per-part submeshes. Normals are computed by
  /// area-weighted averaging when `normals` is empty.
  static LabeledMesh build(std::vector<Vec3> vertices, const std::vector<Triangle>& triangles,
                           const std::vector<int>& triangle_parts, const PartRegistry& registry,
                           std::vector<Vec3> normals = {});

  std::size_t triangle_count() const noexcept { return triangles.size(); }
  int triangle_part(std::size_t tri) const;
  std::vector<int> part_ids() const;
  /// Sorted unique vertex indices referenced by triangles of `part_id`.
  /// Empty for parts absent from the mesh.
  const std::vector<std::uint32_t>& part_vertices(int part_id) const;
  /// Total surface area of a part.
  double part_area(int part_id) const;

  /// Throws on any broken invariant (index range, registry membership,
  /// normal length, submesh coverage).
  void validate(const PartRegistry& registry) const;

  void recompute_normals();
  void update_bounding_radius();
  /// Rebuilds the per-part vertex lists after editing triangles/submeshes.
  void index_parts();

  // part id -> vertex list; filled by build()/index_parts()
  std::vector<std::vector<std::uint32_t>> part_vertex_lists;
};

/// Area-weighted vertex normals. Vertices not referenced by any triangle get +z.
std::vector<Vec3> compute_vertex_normals(const std::vector<Vec3>& vertices,
                                         const std::vector<Triangle>& triangles);

struct ObjGroup {
  std::string name;
  std::vector<Triangle> triangles;
};

/// Minimal Wavefront OBJ reader: positions, normals, polygon faces (fan
/// triangulated) and g/o groups.
struct ObjData {
  std::vector<Vec3> positions;
  std::vector<Vec3> vertex_normals;  // per position; empty when the file has none
  std::vector<ObjGroup> groups;
};

ObjData parse_obj(std::string_view text);

/// Label sidecar: {"groups": {"<obj group>": "<part name>"}, "up_axis": "z"}.
struct LabelMap {
  std::map<std::string, std::string> groups;
  char up_axis = 'z';

  static LabelMap from_json_text(std::string_view text);
  std::string to_json_text() const;
};

inline constexpr double kNormalizedLength = 4.5;

/// Loads, labels and normalizes a mesh: the bounding box is centered on the
/// origin and its longest axis scaled to kNormalizedLength.
LabeledMesh load_labeled_mesh(const std::filesystem::path& geometry_path,
                              const std::filesystem::path& labels_path,
                              const PartRegistry& registry);

LabeledMesh labeled_mesh_from_text(std::string_view obj_text, const LabelMap& labels,
                                   const PartRegistry& registry);

/// Writes the mesh as OBJ (one group per submesh, named after the part) plus
/// the matching label sidecar.
void save_labeled_mesh(const LabeledMesh& mesh, const PartRegistry& registry,
                       const std::filesystem::path& geometry_path,
                       const std::filesystem::path& labels_path);

std::string mesh_to_obj_text(const LabeledMesh& mesh, const PartRegistry& registry);

struct VertexSample {
  std::uint32_t index;
  Vec3 position;
};

/// Uniform draw over the vertices referenced by the part's triangles.
VertexSample sample_part_vertex(const LabeledMesh& mesh, int part_id, Rng& rng);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace carsynth
