#pragma once

// Ray picking against the model or a clipped section, and the poche rule:
// with a plane toggle on, a cap hit lying on that plane wins over any nearer
// surface hit.

#include "poche/section.hpp"

#include <optional>
#include <string>
#include <vector>

namespace poche {

enum class HitSource { Surface, Cap };

std::string_view to_string(HitSource source);

struct RayHit {
  std::string element_id;
  int layer_index = 0;
  bool layered = false;
  double distance = 0.0;
  Vector3 point = Vector3::Zero();
  /// Unit outward normal of the hit triangle.
  Vector3 normal = Vector3::UnitZ();
  HitSource source = HitSource::Surface;
  /// The cut plane for cap hits.
  std::optional<SectionPlane> plane;
};

/// Hits closer than this are treated as the same distance.
inline constexpr double kHitTieEpsilon = 1e-9;

/// Every intersection with the model's triangles, nearest first. Hits within
/// kHitTieEpsilon are ordered by element id, layer, then source; duplicates of
/// one (element, layer, source) at one distance (a ray through a shared edge)
/// are reported once. Throws `InvalidArgument` for a non-unit direction.
std::vector<RayHit> cast_ray(const BuildingModel& model, const Ray& ray);
/// As above over kept and cap triangles; discarded geometry is never hit.
std::vector<RayHit> cast_ray(const SectionResult& result, const Ray& ray);

struct PickOptions {
  double distance_eps = 1e-4;
  double angle_eps_deg = 1.0;
};

struct PickResult {
  std::optional<RayHit> hit;
  bool is_poche = false;
  std::string element_id;
  std::optional<int> layer_index;
};

/// True when `hit` is a cap on `plane` within the tolerances.
bool is_poche_hit(const RayHit& hit, const SectionPlane& plane, const PickOptions& options = {});

/// With `toggle` set, the first hit passing is_poche_hit wins; otherwise (or
/// when none passes) the first hit wins.
PickResult resolve_pick(
    const std::vector<RayHit>& hits,
    const std::optional<SectionPlane>& toggle,
    const PickOptions& options = {});

/// Inspect mode: the whole element in red wireframe. Section and Reveal: the
/// kept part of the element in red solid. A poche pick of a layered mesh
/// narrows the highlight to that layer. Throws `UnknownElement`.
HighlightSpec highlight_for(const PickResult& pick, const BuildingModel& model, const SectionBox& box, ViewMode mode);

} // namespace poche
