#pragma once

#include "poche/model.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace poche {

/// Right-handed in-plane frame for a section plane: u x v equals the plane
/// normal, so a viewer on the discarded side sees u to the right and v up.
struct PlaneFrame {
  Vector3 u;
  Vector3 v;
  Vector3 normal;

  static PlaneFrame of(Axis axis, Sign sign);
  static PlaneFrame of(const SectionPlane& plane) { return of(plane.axis, plane.sign); }

  Vector2 project(const Vector3& p) const { return Vector2(p.dot(u), p.dot(v)); }
  Vector3 lift(const Vector2& q, double offset) const;
};

struct HatchSegment {
  Vector2 a;
  Vector2 b;
};

/// Poche region of one element layer on one plane.
struct CapPolygon {
  std::string element_id;
  int layer_index = 0;
  bool layered = false;
  SectionPlane plane;
  /// Plane-frame loops; outer loops CCW, holes CW.
  std::vector<std::vector<Vector2>> loops;
  /// Cap triangles, indexing the owning ClippedPart's vertices.
  std::vector<Tri> triangles;
  std::vector<HatchSegment> hatch;
  /// Set when the cut profile did not close (leaky input geometry).
  bool open_profile = false;

  double area() const;
};

/// One element layer after clipping. kept, discarded and every cap's
/// triangles share `vertices`, so edge adjacency is index-exact.
struct ClippedPart {
  std::string element_id;
  int layer_index = 0;
  bool layered = false;
  std::vector<Vector3> vertices;
  std::vector<Tri> kept;
  std::vector<Tri> discarded;
  std::vector<CapPolygon> caps;

  /// Volume enclosed by kept + caps.
  double kept_volume() const;
  /// Volume enclosed by discarded + reversed caps.
  double discarded_volume() const;
  /// kept + all cap triangles as one indexed mesh.
  TriMesh closed_kept() const;
  TriMesh kept_mesh() const;
  TriMesh discarded_mesh() const;
  TriMesh cap_mesh() const;
};

struct SectionResult {
  SectionBox box;
  std::vector<ClippedPart> parts;

  double kept_volume() const;
  double discarded_volume() const;
  std::vector<const CapPolygon*> caps() const;
  std::vector<const CapPolygon*> caps_on(Axis axis, Sign sign) const;
  const ClippedPart* part(std::string_view element_id, int layer_index) const;
};

/// Slider update; see SectionBox::with_plane for the clamp rule.
SectionBox set_plane(const SectionBox& box, Axis axis, Sign sign, double offset, bool active);

/// Splits every mesh by the active planes in slot order (x-pos, x-neg,
/// y-pos, ...) and closes each cut with cap triangles. Pure.
SectionResult clip_model(const BuildingModel& model, const SectionBox& box);

// --- poche -------------------------------------------------------------------

using LayerTable = std::map<std::string, LayerSpec>;

/// `id` for unlayered meshes, `id#k` otherwise.
std::string layer_key(std::string_view element_id, int layer_index, bool layered);
LayerTable layer_table(const BuildingModel& model);

struct HatchStyle {
  double spacing = 0.05;
};

/// Fills every cap's hatch segments from its layer's pattern. Throws
/// `LayerRefError` when a cap's layer is missing from `layers`.
SectionResult generate_poche(SectionResult result, const LayerTable& layers, const HatchStyle& style = {});

/// Hatch segments for one region, clipped to the loops (even-odd).
std::vector<HatchSegment> hatch_region(
    const std::vector<std::vector<Vector2>>& loops, Hatch pattern, double spacing);

// --- render layers -----------------------------------------------------------

enum class RenderLayer { KeptSolid, DiscardedWireframe, CapPoche, RevealSolid, HighlightRedWire, HighlightRedSolid };
enum class ViewMode { Inspect, Section, Reveal };

std::string_view to_string(RenderLayer layer);
std::string_view to_string(ViewMode mode);
std::optional<ViewMode> parse_view_mode(std::string_view name);

inline constexpr RenderLayer kAllRenderLayers[] = {
    RenderLayer::KeptSolid,  RenderLayer::DiscardedWireframe, RenderLayer::CapPoche,
    RenderLayer::RevealSolid, RenderLayer::HighlightRedWire,  RenderLayer::HighlightRedSolid};

enum class HighlightStyle { None, RedWire, RedSolid };

/// Which geometry a pick lights up. `layer_index` empty means every layer.
struct HighlightSpec {
  HighlightStyle style = HighlightStyle::None;
  std::string element_id;
  std::optional<int> layer_index;
  /// Highlighted triangles as explicit corners (filled by highlight_for).
  std::vector<std::array<Vector3, 3>> triangles;
};

struct GeometryBatch {
  std::string element_id;
  int layer_index = 0;
  std::vector<Vector3> positions;
  std::vector<Tri> triangles;
};

struct RenderLayerSet {
  std::map<RenderLayer, std::vector<GeometryBatch>> layers;

  std::size_t triangle_count(RenderLayer layer) const;
  std::size_t triangle_count() const;
};

/// Routes clipped geometry into render layers.
///  - Inspect: kept and discarded render as KeptSolid, no caps.
///  - Section: kept -> KeptSolid, discarded -> DiscardedWireframe, caps -> CapPoche.
///  - Reveal: as Section, and uncut elements lying wholly beyond the deepest
///    cap vertex (camera depth) move to RevealSolid. Requires `camera`.
/// A highlight moves the picked element (or layer) to HighlightRedWire in
/// Inspect mode, or its kept triangles to HighlightRedSolid otherwise.
/// Throws `UnknownElement` for a highlight naming no clipped part.
RenderLayerSet classify_layers(
    const SectionResult& result,
    ViewMode mode,
    const std::optional<HighlightSpec>& highlight = std::nullopt,
    const std::optional<CameraPose>& camera = std::nullopt);

// --- exports -----------------------------------------------------------------

struct SvgStyle {
  double cap_stroke_mm = 0.35;
  double hatch_stroke_mm = 0.18;
  double edge_stroke_mm = 0.13;
  double margin_mm = 10.0;
};

/// Orthographic section drawing on plane (axis, sign), 1 user unit = 1 mm,
/// coordinates rounded to 0.1 mm. Throws `NoSection` when the plane is
/// inactive.
std::string export_svg(const SectionResult& result, Axis axis, Sign sign, const SvgStyle& style = {});

enum class MeshSide { Kept, Discarded, Caps };

/// OBJ-subset bytes readable by load_geometry; one group per element layer.
std::string export_mesh(const SectionResult& result, MeshSide side);

// --- wireframe visibility ----------------------------------------------------

struct EdgeSegment {
  std::string element_id;
  int layer_index = 0;
  Vector3 a;
  Vector3 b;
};

struct EdgeVisibility {
  std::vector<EdgeSegment> visible;
  std::vector<EdgeSegment> hidden;
};

/// Feature edges of a welded mesh: boundary edges plus edges whose dihedral
/// angle exceeds `angle_deg`. Pairs of vertex indices, lower index first.
std::vector<std::pair<int, int>> feature_edges(const TriMesh& welded, double angle_deg = 30.0);

/// Splits every feature edge of the model at the points where its occlusion
/// state can change and classifies each piece by a depth test from the camera.
EdgeVisibility edge_visibility(const BuildingModel& model, const CameraPose& camera, double angle_deg = 30.0);

} // namespace poche
