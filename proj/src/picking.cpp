#include "poche/picking.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace poche {

std::string_view to_string(HitSource source) { return source == HitSource::Cap ? "cap" : "surface"; }

namespace {

struct HitTarget {
  const std::vector<Vector3>* vertices;
  const std::vector<Tri>* triangles;
  const std::string* element_id;
  int layer_index;
  bool layered;
  HitSource source;
  std::optional<SectionPlane> plane;
};

Box3 bounds_of(const std::vector<Vector3>& vertices, const std::vector<Tri>& triangles) {
  Box3 box;
  for (const auto& t : triangles) {
    for (int k = 0; k < 3; ++k) {
      box.extend(vertices[t[k]]);
    }
  }
  return box;
}

void intersect(const HitTarget& target, const Ray& ray, std::vector<RayHit>& out) {
  if (target.triangles->empty() ||
      !intersect_ray_box<double>(ray.origin, ray.direction, bounds_of(*target.vertices, *target.triangles), 1e-9)) {
    return;
  }
  for (const auto& t : *target.triangles) {
    const Vector3& a = (*target.vertices)[t[0]];
    const Vector3& b = (*target.vertices)[t[1]];
    const Vector3& c = (*target.vertices)[t[2]];
    if (auto h = intersect_ray_triangle<double>(ray.origin, ray.direction, a, b, c)) {
      RayHit hit;
      hit.element_id = *target.element_id;
      hit.layer_index = target.layer_index;
      hit.layered = target.layered;
      hit.distance = h->t;
      hit.point = ray.at(h->t);
      hit.normal = triangle_normal<double>(a, b, c).normalized();
      hit.source = target.source;
      hit.plane = target.plane;
      out.push_back(std::move(hit));
    }
  }
}

auto tie_key(const RayHit& h) { return std::tie(h.element_id, h.layer_index, h.source); }

std::vector<RayHit> order_hits(std::vector<RayHit> hits) {
  std::sort(hits.begin(), hits.end(), [](const RayHit& a, const RayHit& b) {
    return a.distance != b.distance ? a.distance < b.distance : tie_key(a) < tie_key(b);
  });
  std::vector<RayHit> out;
  std::size_t i = 0;
  while (i < hits.size()) {
    std::size_t j = i + 1;
    while (j < hits.size() && hits[j].distance - hits[j - 1].distance < kHitTieEpsilon) {
      ++j;
    }
    std::stable_sort(hits.begin() + i, hits.begin() + j,
                     [](const RayHit& a, const RayHit& b) { return tie_key(a) < tie_key(b); });
    for (std::size_t k = i; k < j; ++k) {
      if (k > i && tie_key(hits[k]) == tie_key(out.back())) {
        continue;
      }
      out.push_back(std::move(hits[k]));
    }
    i = j;
  }
  return out;
}

} // namespace

std::vector<RayHit> cast_ray(const BuildingModel& model, const Ray& ray) {
  ray.validate();
  std::vector<RayHit> hits;
  for (const auto& e : model.elements()) {
    for (const auto& m : e.meshes) {
      intersect({&m.mesh.vertices, &m.mesh.triangles, &e.element_id, m.layer.layer_index, m.layered,
                 HitSource::Surface, std::nullopt},
                ray, hits);
    }
  }
  return order_hits(std::move(hits));
}

std::vector<RayHit> cast_ray(const SectionResult& result, const Ray& ray) {
  ray.validate();
  std::vector<RayHit> hits;
  for (const auto& part : result.parts) {
    intersect({&part.vertices, &part.kept, &part.element_id, part.layer_index, part.layered, HitSource::Surface,
               std::nullopt},
              ray, hits);
    for (const auto& cap : part.caps) {
      intersect({&part.vertices, &cap.triangles, &part.element_id, part.layer_index, part.layered, HitSource::Cap,
                 cap.plane},
                ray, hits);
    }
  }
  return order_hits(std::move(hits));
}

bool is_poche_hit(const RayHit& hit, const SectionPlane& plane, const PickOptions& options) {
  if (hit.source != HitSource::Cap) {
    return false;
  }
  if (std::abs(plane.signed_distance(hit.point)) > options.distance_eps) {
    return false;
  }
  const double cos_angle = std::clamp(hit.normal.dot(plane.normal()), -1.0, 1.0);
  return std::acos(cos_angle) <= options.angle_eps_deg * std::numbers::pi / 180.0;
}

PickResult resolve_pick(
    const std::vector<RayHit>& hits, const std::optional<SectionPlane>& toggle, const PickOptions& options) {
  PickResult pick;
  if (hits.empty()) {
    return pick;
  }
  const RayHit* chosen = &hits.front();
  if (toggle) {
    const auto it = std::find_if(hits.begin(), hits.end(),
                                 [&](const RayHit& h) { return is_poche_hit(h, *toggle, options); });
    if (it != hits.end()) {
      chosen = &*it;
      pick.is_poche = true;
    }
  }
  pick.hit = *chosen;
  pick.element_id = chosen->element_id;
  pick.layer_index = chosen->layer_index;
  return pick;
}

HighlightSpec highlight_for(const PickResult& pick, const BuildingModel& model, const SectionBox& box, ViewMode mode) {
  HighlightSpec spec;
  if (!pick.hit) {
    return spec;
  }
  const Element* element = model.find(pick.element_id);
  if (element == nullptr) {
    throw Error(ErrorCode::UnknownElement, "no element '" + pick.element_id + "'");
  }
  spec.element_id = element->element_id;
  if (pick.is_poche && pick.hit->layered) {
    spec.layer_index = pick.layer_index;
  }
  Element subset = *element;
  if (spec.layer_index) {
    std::erase_if(subset.meshes, [&](const ElementMesh& m) { return m.layer.layer_index != *spec.layer_index; });
  }
  auto add = [&](const std::vector<Vector3>& verts, const std::vector<Tri>& tris) {
    for (const auto& t : tris) {
      spec.triangles.push_back({verts[t[0]], verts[t[1]], verts[t[2]]});
    }
  };
  if (mode == ViewMode::Inspect) {
    spec.style = HighlightStyle::RedWire;
    for (const auto& m : subset.meshes) {
      add(m.mesh.vertices, m.mesh.triangles);
    }
  } else {
    spec.style = HighlightStyle::RedSolid;
    const SectionResult clipped = clip_model(BuildingModel({std::move(subset)}), box);
    for (const auto& part : clipped.parts) {
      add(part.vertices, part.kept);
    }
  }
  return spec;
}

} // namespace poche
