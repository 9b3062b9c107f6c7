#pragma once

// Scene domain types. Coordinates are meters in a right-handed, Z-up frame.

#include "poche/error.hpp"
#include "poche/geometry.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace poche {

inline constexpr double kPlaneEpsilon = 1e-9;
inline constexpr double kMinTriangleArea = 1e-12;

struct TriMesh {
  std::vector<Vector3> vertices;
  std::vector<Tri> triangles;

  std::size_t size() const { return triangles.size(); }
  Vector3 corner(std::size_t t, int k) const { return vertices[triangles[t][k]]; }
  /// Unit outward normal (from winding); zero for a degenerate triangle.
  Vector3 normal(std::size_t t) const;
  double area(std::size_t t) const;
  Box3 bounds() const;

  /// Throws `InvalidArgument` on non-finite coordinates, out-of-range indices or
  /// triangles with area below kMinTriangleArea.
  void validate() const;

  /// Every undirected edge shared by exactly two triangles with opposite winding.
  /// Vertices are compared by index, so callers should `welded()` first when
  /// the mesh came from a soup.
  bool is_watertight() const;

  /// Copy with exactly coincident vertices merged; vertex order of first
  /// occurrence is preserved.
  TriMesh welded() const;
};

double signed_volume(const TriMesh& mesh);

enum class Hatch { Diagonal45, Crosshatch, Dots, Zigzag, Solid, None };

std::string_view to_string(Hatch hatch);
/// Throws `LayerRefError` for names outside the enum.
Hatch parse_hatch(std::string_view name);

struct LayerSpec {
  int layer_index = 0;
  std::string material_name;
  Hatch hatch = Hatch::Diagonal45;
  double thickness = 0.0;

  bool operator==(const LayerSpec&) const = default;
};

struct ElementMesh {
  LayerSpec layer;
  /// True when the geometry group was named `<id>#<k>`.
  bool layered = false;
  TriMesh mesh;
};

struct Element {
  std::string element_id;
  std::string category;
  std::string family;
  std::vector<ElementMesh> meshes;

  Box3 bounds() const;
  const ElementMesh* mesh_for_layer(int layer_index) const;
};

class BuildingModel {
public:
  BuildingModel() = default;
  /// Throws `DuplicateId` for repeated element ids, `InvalidArgument` for an
  /// element without meshes or an empty id.
  explicit BuildingModel(std::vector<Element> elements);

  const std::vector<Element>& elements() const { return elements_; }
  bool empty() const { return elements_.empty(); }
  const Element* find(std::string_view element_id) const;
  std::size_t triangle_count() const;

private:
  std::vector<Element> elements_;
};

/// Tight bounds of every vertex in the model. Throws `EmptyModel`.
Box3 aabb(const BuildingModel& model);

enum class Axis { X = 0, Y = 1, Z = 2 };
enum class Sign { Pos = 0, Neg = 1 };

std::string_view to_string(Axis axis);
std::string_view to_string(Sign sign);
/// Accepts "x-pos", "Y-NEG", ...; std::nullopt for anything else.
std::optional<std::pair<Axis, Sign>> parse_plane_name(std::string_view name);
std::string plane_name(Axis axis, Sign sign);

inline int index_of(Axis axis) { return static_cast<int>(axis); }

struct SectionPlane {
  Axis axis = Axis::X;
  Sign sign = Sign::Pos;
  double offset = 0.0;
  bool active = false;

  /// A Pos plane faces along -axis, a Neg plane along +axis.
  Vector3 normal() const;
  /// (p - p0) . normal; the kept side is where this is <= 0.
  double signed_distance(const Vector3& p) const;

  bool operator==(const SectionPlane&) const = default;
};

/// Six axis-aligned planes. Values are immutable: every update returns a new
/// box, and offsets are clamped so that offset(Pos) <= offset(Neg) per axis.
class SectionBox {
public:
  /// Unbounded limits, Pos planes at -inf side and Neg planes at +inf side,
  /// all inactive.
  SectionBox();
  /// Planes parked just outside `bounds` (grown by `margin_fraction` of the
  /// per-axis extent), all inactive. Offsets are clamped to the grown bounds.
  static SectionBox around(const Box3& bounds, double margin_fraction = 0.05);

  const SectionPlane& plane(Axis axis, Sign sign) const { return planes_[slot(axis, sign)]; }
  const std::array<SectionPlane, 6>& planes() const { return planes_; }
  const Box3& limits() const { return limits_; }
  bool any_active() const;

  [[nodiscard]] SectionBox with_plane(Axis axis, Sign sign, double offset, bool active) const;

  bool operator==(const SectionBox& other) const {
    return planes_ == other.planes_ && limits_.min() == other.limits_.min() && limits_.max() == other.limits_.max();
  }

private:
  static int slot(Axis axis, Sign sign) { return 2 * index_of(axis) + static_cast<int>(sign); }

  std::array<SectionPlane, 6> planes_;
  Box3 limits_;
};

/// True iff `p` is on the kept side of every active plane.
bool kept_side(const SectionBox& box, const Vector3& p);

struct CameraPose {
  Vector3 position = Vector3::Zero();
  /// World-to-camera rotation; camera looks along +z, x right, y down.
  Matrix3 rotation = Matrix3::Identity();
  double focal_px = 1000.0;
  Vector2 principal_px = Vector2(640.0, 360.0);
  int width_px = 1280;
  int height_px = 720;

  /// Throws `InvalidPose` when the rotation is not orthonormal within 1e-9 or
  /// the focal length is not positive.
  void validate() const;

  Vector3 to_camera(const Vector3& p) const { return rotation * (p - position); }
  Vector3 forward() const { return rotation.row(2).transpose(); }
  double depth(const Vector3& p) const { return to_camera(p).z(); }

  static CameraPose look_at(
      const Vector3& eye,
      const Vector3& target,
      const Vector3& up = Vector3::UnitZ(),
      double focal_px = 1000.0,
      Vector2 principal_px = Vector2(640.0, 360.0));
};

struct Ray {
  Vector3 origin = Vector3::Zero();
  Vector3 direction = Vector3::UnitX();

  /// Throws `InvalidArgument` unless |direction| = 1 within 1e-9.
  void validate() const;
  Vector3 at(double t) const { return origin + t * direction; }
};

} // namespace poche
