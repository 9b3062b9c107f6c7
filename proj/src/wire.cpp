#include "poche/wire.hpp"

#include <cmath>

namespace poche::wire {

using nlohmann::json;

json vec(const Vector3& v) { return json::array({v.x(), v.y(), v.z()}); }

json box_json(const Box3& box) { return {{"min", vec(box.min())}, {"max", vec(box.max())}}; }

json section_box_json(const SectionBox& box) {
  json planes = json::array();
  for (const auto& p : box.planes()) {
    planes.push_back({{"plane", plane_name(p.axis, p.sign)}, {"offset", p.offset}, {"active", p.active}});
  }
  return {{"planes", std::move(planes)}};
}

json layer_json(const LayerSpec& spec) {
  return {{"layer_index", spec.layer_index},
          {"material", spec.material_name},
          {"hatch", std::string(to_string(spec.hatch))},
          {"thickness_m", spec.thickness}};
}

json model_summary(const BuildingModel& model, const LayerTable& layers) {
  json elements = json::array();
  for (const auto& e : model.elements()) {
    json meshes = json::array();
    for (const auto& m : e.meshes) {
      const auto it = layers.find(layer_key(e.element_id, m.layer.layer_index, m.layered));
      json layer = layer_json(it != layers.end() ? it->second : m.layer);
      layer["layer_index"] = m.layer.layer_index;
      layer["layered"] = m.layered;
      layer["triangles"] = m.mesh.triangles.size();
      meshes.push_back(std::move(layer));
    }
    elements.push_back({{"element_id", e.element_id},
                        {"category", e.category},
                        {"family", e.family},
                        {"aabb", box_json(e.bounds())},
                        {"layers", std::move(meshes)}});
  }
  return {{"aabb", box_json(aabb(model))},
          {"elements", std::move(elements)},
          {"triangle_count", model.triangle_count()},
          {"units", "m"}};
}

json batch_json(const GeometryBatch& batch) {
  json positions = json::array();
  for (const auto& p : batch.positions) {
    positions.push_back(p.x());
    positions.push_back(p.y());
    positions.push_back(p.z());
  }
  json indices = json::array();
  for (const auto& t : batch.triangles) {
    indices.push_back(t[0]);
    indices.push_back(t[1]);
    indices.push_back(t[2]);
  }
  return {{"element_id", batch.element_id},
          {"layer_index", batch.layer_index},
          {"positions", std::move(positions)},
          {"indices", std::move(indices)}};
}

json render_layers_json(const RenderLayerSet& set) {
  json layers = json::object();
  for (RenderLayer l : kAllRenderLayers) {
    json batches = json::array();
    if (auto it = set.layers.find(l); it != set.layers.end()) {
      for (const auto& b : it->second) {
        batches.push_back(batch_json(b));
      }
    }
    layers[std::string(to_string(l))] = std::move(batches);
  }
  return layers;
}

json section_response(const SectionBox& box, ViewMode mode, const RenderLayerSet& set) {
  return {{"box", section_box_json(box)}, {"mode", std::string(to_string(mode))}, {"layers", render_layers_json(set)}};
}

json hit_json(const RayHit& hit) {
  json j = {{"element_id", hit.element_id},
            {"layer_index", hit.layer_index},
            {"distance", hit.distance},
            {"point", vec(hit.point)},
            {"normal", vec(hit.normal)},
            {"source", std::string(to_string(hit.source))}};
  j["plane"] = hit.plane ? json(plane_name(hit.plane->axis, hit.plane->sign)) : json(nullptr);
  return j;
}

json record_json(const MetadataRecord& record) {
  json j = to_json(record);
  j["element_id"] = record.element_id;
  return j;
}

json pick_response(
    const PickResult& pick,
    const std::optional<HighlightSpec>& highlight,
    const MetadataStore& store,
    const LayerTable& layers) {
  if (!pick.hit) {
    return {{"hit", nullptr}};
  }
  json j;
  j["hit"] = hit_json(*pick.hit);
  j["is_poche"] = pick.is_poche;
  j["element_id"] = pick.element_id;
  j["layer_index"] = pick.layer_index ? json(*pick.layer_index) : json(nullptr);
  const auto record = store.get(pick.element_id);
  j["metadata"] = record ? record_json(*record) : json(nullptr);
  const auto it = layers.find(layer_key(pick.element_id, pick.hit->layer_index, pick.hit->layered));
  j["layer"] = it != layers.end() ? layer_json(it->second) : json(nullptr);
  if (highlight && highlight->style != HighlightStyle::None) {
    j["highlight"] = {{"style", highlight->style == HighlightStyle::RedWire ? "red_wireframe" : "red_solid"},
                      {"element_id", highlight->element_id},
                      {"layer_index", highlight->layer_index ? json(*highlight->layer_index) : json(nullptr)},
                      {"triangles", highlight->triangles.size()}};
  } else {
    j["highlight"] = nullptr;
  }
  return j;
}

json validation_json(const ValidationReport& report) {
  return {{"clean", report.clean()},
          {"elements", report.element_count},
          {"rows", report.row_count},
          {"orphan_geometry_ids", report.orphan_geometry_ids},
          {"orphan_metadata_ids", report.orphan_metadata_ids},
          {"duplicate_rows", report.duplicate_rows}};
}

json alignment_json(const AlignmentSummary& summary) {
  json images = json::array();
  for (const auto& r : summary.per_image) {
    images.push_back({{"errors_mm", r.errors_mm},
                      {"mean_mm", r.mean_mm},
                      {"max_mm", r.max_mm},
                      {"scale_mm_per_px", r.scale_mm_per_px}});
  }
  return {{"images", std::move(images)},
          {"mean_of_images_mm", summary.mean_of_images_mm},
          {"pooled_mean_mm", summary.pooled_mean_mm},
          {"max_mm", summary.max_mm}};
}

// --- requests ----------------------------------------------------------------

namespace {

[[noreturn]] void bad(const std::string& message) { throw RequestError(400, message); }

Vector3 vec3(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) {
    bad(std::string(what) + " must be an array of three numbers");
  }
  Vector3 v;
  for (int k = 0; k < 3; ++k) {
    if (!j[k].is_number()) {
      bad(std::string(what) + " must be an array of three numbers");
    }
    v[k] = j[k].get<double>();
  }
  if (!v.allFinite()) {
    bad(std::string(what) + " must be finite");
  }
  return v;
}

std::pair<Axis, Sign> plane_from(const json& j) {
  if (!j.is_string()) {
    bad("plane must be a string such as \"x-pos\"");
  }
  const auto parsed = parse_plane_name(j.get<std::string>());
  if (!parsed) {
    throw RequestError(422, "unknown plane '" + j.get<std::string>() + "'");
  }
  return *parsed;
}

} // namespace

CameraPose parse_camera(const json& j) {
  if (!j.is_object() || !j.contains("position")) {
    bad("camera needs a position");
  }
  const Vector3 position = vec3(j["position"], "camera.position");
  double focal = 1000.0;
  if (j.contains("focal_px")) {
    if (!j["focal_px"].is_number()) {
      bad("camera.focal_px must be a number");
    }
    focal = j["focal_px"].get<double>();
  }
  CameraPose cam;
  try {
    if (j.contains("rotation")) {
      const json& r = j["rotation"];
      if (!r.is_array() || r.size() != 3) {
        bad("camera.rotation must be a 3x3 array");
      }
      cam.position = position;
      for (int i = 0; i < 3; ++i) {
        cam.rotation.row(i) = vec3(r[i], "camera.rotation row").transpose();
      }
      cam.focal_px = focal;
    } else if (j.contains("target")) {
      const Vector3 up = j.contains("up") ? vec3(j["up"], "camera.up") : Vector3::UnitZ();
      cam = CameraPose::look_at(position, vec3(j["target"], "camera.target"), up, focal);
    } else {
      bad("camera needs a target or a rotation");
    }
    cam.validate();
  } catch (const RequestError&) {
    throw;
  } catch (const Error& e) {
    bad(e.what());
  }
  return cam;
}

SectionRequest parse_section_request(const json& body) {
  if (!body.is_object()) {
    bad("section request must be a JSON object");
  }
  SectionRequest req;
  if (body.contains("planes")) {
    const json& planes = body["planes"];
    if (!planes.is_array()) {
      bad("planes must be an array");
    }
    for (const json& p : planes) {
      if (!p.is_object() || !p.contains("plane") || !p.contains("offset")) {
        bad("each plane update needs plane and offset");
      }
      PlaneUpdate u;
      std::tie(u.axis, u.sign) = plane_from(p["plane"]);
      if (!p["offset"].is_number() || !std::isfinite(p["offset"].get<double>())) {
        bad("plane offset must be a finite number");
      }
      u.offset = p["offset"].get<double>();
      if (p.contains("active")) {
        if (!p["active"].is_boolean()) {
          bad("plane active must be a boolean");
        }
        u.active = p["active"].get<bool>();
      }
      req.planes.push_back(u);
    }
  }
  if (body.contains("mode")) {
    if (!body["mode"].is_string()) {
      bad("mode must be a string");
    }
    req.mode = parse_view_mode(body["mode"].get<std::string>());
    if (!req.mode) {
      throw RequestError(422, "unknown mode '" + body["mode"].get<std::string>() + "'");
    }
  }
  if (body.contains("camera") && !body["camera"].is_null()) {
    req.camera = parse_camera(body["camera"]);
  }
  if (body.contains("highlight")) {
    const json& h = body["highlight"];
    if (h.is_null()) {
      req.clear_highlight = true;
    } else {
      if (!h.is_object() || !h.contains("element_id") || !h["element_id"].is_string()) {
        bad("highlight needs an element_id");
      }
      HighlightTarget t{h["element_id"].get<std::string>(), std::nullopt};
      if (h.contains("layer_index") && !h["layer_index"].is_null()) {
        if (!h["layer_index"].is_number_integer()) {
          bad("highlight.layer_index must be an integer");
        }
        t.layer_index = h["layer_index"].get<int>();
      }
      req.highlight = t;
    }
  }
  return req;
}

PickRequest parse_pick_request(const json& body) {
  if (!body.is_object() || !body.contains("origin") || !body.contains("direction")) {
    bad("pick request needs origin and direction");
  }
  PickRequest req;
  req.ray.origin = vec3(body["origin"], "origin");
  req.ray.direction = vec3(body["direction"], "direction");
  if (std::abs(req.ray.direction.norm() - 1.0) > 1e-9) {
    bad("direction must be a unit vector");
  }
  if (body.contains("active_plane") && !body["active_plane"].is_null()) {
    req.toggle = plane_from(body["active_plane"]);
  }
  return req;
}

} // namespace poche::wire
