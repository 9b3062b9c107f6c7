#pragma once

// JSON shapes shared by the HTTP service and the CLI. Every payload is built
// from library values here so the two front ends cannot drift apart.

#include "poche/ingest.hpp"
#include "poche/metastore.hpp"
#include "poche/picking.hpp"
#include "poche/section.hpp"
#include "poche/spatial.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace poche::wire {

/// Raised for request bodies that fail validation. `status` is the HTTP code
/// the service answers with: 400 for shape errors, 422 for unknown names.
struct RequestError : Error {
  RequestError(int status, const std::string& message)
      : Error(ErrorCode::InvalidArgument, message), status(status) {}
  int status;
};

nlohmann::json vec(const Vector3& v);
nlohmann::json box_json(const Box3& box);
nlohmann::json section_box_json(const SectionBox& box);
nlohmann::json layer_json(const LayerSpec& spec);

/// Element ids, AABB and layer specs; elements in model order.
nlohmann::json model_summary(const BuildingModel& model, const LayerTable& layers);

/// Flat arrays: positions [x0,y0,z0,x1,...] and indices [i0,j0,k0,...].
nlohmann::json batch_json(const GeometryBatch& batch);
nlohmann::json render_layers_json(const RenderLayerSet& set);
nlohmann::json section_response(const SectionBox& box, ViewMode mode, const RenderLayerSet& set);

nlohmann::json hit_json(const RayHit& hit);
/// `{"hit": null}` for a miss; otherwise the pick joined with the element's
/// metadata record and the hit layer's spec (null when unknown).
nlohmann::json pick_response(
    const PickResult& pick,
    const std::optional<HighlightSpec>& highlight,
    const MetadataStore& store,
    const LayerTable& layers);

nlohmann::json record_json(const MetadataRecord& record);

nlohmann::json validation_json(const ValidationReport& report);
nlohmann::json alignment_json(const AlignmentSummary& summary);

// --- requests ----------------------------------------------------------------

struct PlaneUpdate {
  Axis axis = Axis::X;
  Sign sign = Sign::Pos;
  double offset = 0.0;
  bool active = true;
};

struct HighlightTarget {
  std::string element_id;
  std::optional<int> layer_index;
};

struct SectionRequest {
  std::vector<PlaneUpdate> planes;
  std::optional<ViewMode> mode;
  std::optional<CameraPose> camera;
  /// Absent keeps the session highlight; `clear_highlight` drops it.
  std::optional<HighlightTarget> highlight;
  bool clear_highlight = false;
};

struct PickRequest {
  Ray ray;
  std::optional<std::pair<Axis, Sign>> toggle;
};

/// `{"planes": [{"plane": "x-pos", "offset": 0.5, "active": true}, ...],
///   "mode": "section", "camera": {...}, "highlight": {...} | null}`.
/// Throws RequestError.
SectionRequest parse_section_request(const nlohmann::json& body);
/// `{"origin": [x,y,z], "direction": [x,y,z], "active_plane": "x-pos" | null}`.
/// Throws RequestError (400 for a non-unit direction).
PickRequest parse_pick_request(const nlohmann::json& body);
/// `{"position": [...], "target": [...], "up"?: [...]}` or
/// `{"position": [...], "rotation": [[...],[...],[...]]}`, optional `focal_px`.
CameraPose parse_camera(const nlohmann::json& j);

} // namespace poche::wire
