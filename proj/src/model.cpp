#include "poche/model.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <map>
#include <set>
#include <tuple>

namespace poche {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyModel: return "EmptyModel";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::LayerRefError: return "LayerRefError";
    case ErrorCode::HeaderError: return "HeaderError";
    case ErrorCode::ConflictError: return "ConflictError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::NoSection: return "NoSection";
    case ErrorCode::UnknownElement: return "UnknownElement";
    case ErrorCode::BehindCamera: return "BehindCamera";
    case ErrorCode::DegenerateReference: return "DegenerateReference";
    case ErrorCode::InvalidPose: return "InvalidPose";
    case ErrorCode::DegenerateTest: return "DegenerateTest";
    case ErrorCode::InvalidDuration: return "InvalidDuration";
    case ErrorCode::DegenerateBaseline: return "DegenerateBaseline";
    case ErrorCode::AllTies: return "AllTies";
    case ErrorCode::PairSetError: return "PairSetError";
    case ErrorCode::RangeError: return "RangeError";
    case ErrorCode::ArityError: return "ArityError";
    case ErrorCode::EmptyCohort: return "EmptyCohort";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

// --- TriMesh -----------------------------------------------------------------

Vector3 TriMesh::normal(std::size_t t) const {
  const Vector3 n = triangle_normal<double>(corner(t, 0), corner(t, 1), corner(t, 2));
  const double len = n.norm();
  return len > 0.0 ? Vector3(n / len) : Vector3::Zero();
}

double TriMesh::area(std::size_t t) const {
  return triangle_area<double>(corner(t, 0), corner(t, 1), corner(t, 2));
}

Box3 TriMesh::bounds() const {
  Box3 box;
  for (const auto& v : vertices) {
    box.extend(v);
  }
  return box;
}

void TriMesh::validate() const {
  for (const auto& v : vertices) {
    if (!v.allFinite()) {
      throw Error(ErrorCode::InvalidArgument, "non-finite vertex coordinate");
    }
  }
  const int n = static_cast<int>(vertices.size());
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    for (int k = 0; k < 3; ++k) {
      if (triangles[t][k] < 0 || triangles[t][k] >= n) {
        throw Error(ErrorCode::InvalidArgument, "triangle " + std::to_string(t) + " index out of range");
      }
    }
    if (area(t) <= kMinTriangleArea) {
      throw Error(ErrorCode::InvalidArgument, "triangle " + std::to_string(t) + " is degenerate");
    }
  }
}

bool TriMesh::is_watertight() const {
  if (triangles.empty()) {
    return false;
  }
  std::map<std::pair<int, int>, int> directed;
  for (const auto& t : triangles) {
    for (int k = 0; k < 3; ++k) {
      ++directed[{t[k], t[(k + 1) % 3]}];
    }
  }
  for (const auto& [edge, count] : directed) {
    if (count != 1) {
      return false;
    }
    const auto twin = directed.find({edge.second, edge.first});
    if (twin == directed.end() || twin->second != 1) {
      return false;
    }
  }
  return true;
}

TriMesh TriMesh::welded() const {
  TriMesh out;
  std::map<std::tuple<double, double, double>, int> index;
  std::vector<int> remap(vertices.size());
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const auto key = std::make_tuple(vertices[i].x(), vertices[i].y(), vertices[i].z());
    auto [it, inserted] = index.try_emplace(key, static_cast<int>(out.vertices.size()));
    if (inserted) {
      out.vertices.push_back(vertices[i]);
    }
    remap[i] = it->second;
  }
  out.triangles.reserve(triangles.size());
  for (const auto& t : triangles) {
    out.triangles.emplace_back(remap[t[0]], remap[t[1]], remap[t[2]]);
  }
  return out;
}

double signed_volume(const TriMesh& mesh) {
  double vol = 0.0;
  for (std::size_t t = 0; t < mesh.size(); ++t) {
    vol += signed_tet_volume<double>(mesh.corner(t, 0), mesh.corner(t, 1), mesh.corner(t, 2));
  }
  return vol;
}

// --- layers ------------------------------------------------------------------

std::string_view to_string(Hatch hatch) {
  switch (hatch) {
    case Hatch::Diagonal45: return "diagonal45";
    case Hatch::Crosshatch: return "crosshatch";
    case Hatch::Dots: return "dots";
    case Hatch::Zigzag: return "zigzag";
    case Hatch::Solid: return "solid";
    case Hatch::None: return "none";
  }
  return "none";
}

Hatch parse_hatch(std::string_view name) {
  for (Hatch h : {Hatch::Diagonal45, Hatch::Crosshatch, Hatch::Dots, Hatch::Zigzag, Hatch::Solid, Hatch::None}) {
    if (to_string(h) == name) {
      return h;
    }
  }
  throw Error(ErrorCode::LayerRefError, "unknown hatch pattern '" + std::string(name) + "'");
}

// --- elements and model ------------------------------------------------------

Box3 Element::bounds() const {
  Box3 box;
  for (const auto& m : meshes) {
    box.extend(m.mesh.bounds());
  }
  return box;
}

const ElementMesh* Element::mesh_for_layer(int layer_index) const {
  for (const auto& m : meshes) {
    if (m.layer.layer_index == layer_index) {
      return &m;
    }
  }
  return nullptr;
}

BuildingModel::BuildingModel(std::vector<Element> elements) : elements_(std::move(elements)) {
  std::set<std::string_view> seen;
  for (const auto& e : elements_) {
    if (e.element_id.empty()) {
      throw Error(ErrorCode::InvalidArgument, "element with empty id");
    }
    if (e.meshes.empty()) {
      throw Error(ErrorCode::InvalidArgument, "element '" + e.element_id + "' has no meshes");
    }
    if (!seen.insert(e.element_id).second) {
      throw Error(ErrorCode::DuplicateId, "element id '" + e.element_id + "' appears twice");
    }
    std::set<int> layers;
    for (const auto& m : e.meshes) {
      if (!layers.insert(m.layer.layer_index).second) {
        throw Error(ErrorCode::DuplicateId,
                    "element '" + e.element_id + "' repeats layer " + std::to_string(m.layer.layer_index));
      }
    }
  }
}

const Element* BuildingModel::find(std::string_view element_id) const {
  for (const auto& e : elements_) {
    if (e.element_id == element_id) {
      return &e;
    }
  }
  return nullptr;
}

std::size_t BuildingModel::triangle_count() const {
  std::size_t n = 0;
  for (const auto& e : elements_) {
    for (const auto& m : e.meshes) {
      n += m.mesh.size();
    }
  }
  return n;
}

Box3 aabb(const BuildingModel& model) {
  Box3 box;
  for (const auto& e : model.elements()) {
    box.extend(e.bounds());
  }
  if (box.isEmpty()) {
    throw Error(ErrorCode::EmptyModel, "model has no vertices");
  }
  return box;
}

// --- planes ------------------------------------------------------------------

std::string_view to_string(Axis axis) {
  switch (axis) {
    case Axis::X: return "x";
    case Axis::Y: return "y";
    case Axis::Z: return "z";
  }
  return "x";
}

std::string_view to_string(Sign sign) {
  return sign == Sign::Pos ? "pos" : "neg";
}

std::string plane_name(Axis axis, Sign sign) {
  return std::string(to_string(axis)) + "-" + std::string(to_string(sign));
}

std::optional<std::pair<Axis, Sign>> parse_plane_name(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
    for (Sign s : {Sign::Pos, Sign::Neg}) {
      if (lower == plane_name(a, s)) {
        return std::make_pair(a, s);
      }
    }
  }
  return std::nullopt;
}

Vector3 SectionPlane::normal() const {
  Vector3 n = Vector3::Zero();
  n[index_of(axis)] = sign == Sign::Pos ? -1.0 : 1.0;
  return n;
}

double SectionPlane::signed_distance(const Vector3& p) const {
  const double d = p[index_of(axis)] - offset;
  return sign == Sign::Pos ? -d : d;
}

SectionBox::SectionBox() {
  constexpr double inf = std::numeric_limits<double>::infinity();
  limits_ = Box3(Vector3::Constant(-inf), Vector3::Constant(inf));
  for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
    planes_[slot(a, Sign::Pos)] = SectionPlane{a, Sign::Pos, -inf, false};
    planes_[slot(a, Sign::Neg)] = SectionPlane{a, Sign::Neg, inf, false};
  }
}

SectionBox SectionBox::around(const Box3& bounds, double margin_fraction) {
  SectionBox box;
  if (bounds.isEmpty()) {
    return box;
  }
  const Vector3 extent = bounds.sizes();
  for (int k = 0; k < 3; ++k) {
    const double margin = std::max(margin_fraction * extent[k], 1e-3);
    box.limits_.min()[k] = bounds.min()[k] - margin;
    box.limits_.max()[k] = bounds.max()[k] + margin;
    const Axis a = static_cast<Axis>(k);
    box.planes_[slot(a, Sign::Pos)].offset = box.limits_.min()[k];
    box.planes_[slot(a, Sign::Neg)].offset = box.limits_.max()[k];
  }
  return box;
}

bool SectionBox::any_active() const {
  return std::any_of(planes_.begin(), planes_.end(), [](const SectionPlane& p) { return p.active; });
}

SectionBox SectionBox::with_plane(Axis axis, Sign sign, double offset, bool active) const {
  if (!std::isfinite(offset)) {
    throw Error(ErrorCode::InvalidArgument, "plane offset must be finite");
  }
  SectionBox next = *this;
  const int k = index_of(axis);
  double lo = limits_.min()[k];
  double hi = limits_.max()[k];
  if (sign == Sign::Pos) {
    hi = std::min(hi, plane(axis, Sign::Neg).offset);
  } else {
    lo = std::max(lo, plane(axis, Sign::Pos).offset);
  }
  auto& p = next.planes_[slot(axis, sign)];
  p.offset = std::clamp(offset, lo, hi);
  p.active = active;
  return next;
}

bool kept_side(const SectionBox& box, const Vector3& p) {
  for (const auto& plane : box.planes()) {
    if (plane.active && plane.signed_distance(p) > kPlaneEpsilon) {
      return false;
    }
  }
  return true;
}

// --- camera & ray ------------------------------------------------------------

void CameraPose::validate() const {
  if (!rotation.allFinite() || (rotation.transpose() * rotation - Matrix3::Identity()).cwiseAbs().maxCoeff() > 1e-9 ||
      rotation.determinant() <= 0.0) {
    throw Error(ErrorCode::InvalidPose, "camera rotation is not a proper orthonormal matrix");
  }
  if (!(focal_px > 0.0) || !std::isfinite(focal_px)) {
    throw Error(ErrorCode::InvalidPose, "focal length must be positive");
  }
  if (!position.allFinite()) {
    throw Error(ErrorCode::InvalidPose, "camera position must be finite");
  }
}

CameraPose CameraPose::look_at(
    const Vector3& eye,
    const Vector3& target,
    const Vector3& up,
    double focal_px,
    Vector2 principal_px) {
  const Vector3 z = (target - eye).normalized();
  Vector3 x = z.cross(up);
  if (x.norm() < 1e-12) {
    x = z.cross(Vector3::UnitY());
  }
  x.normalize();
  const Vector3 y = z.cross(x);
  CameraPose cam;
  cam.position = eye;
  cam.rotation.row(0) = x.transpose();
  cam.rotation.row(1) = y.transpose();
  cam.rotation.row(2) = z.transpose();
  cam.focal_px = focal_px;
  cam.principal_px = principal_px;
  cam.width_px = static_cast<int>(2 * principal_px.x());
  cam.height_px = static_cast<int>(2 * principal_px.y());
  return cam;
}

void Ray::validate() const {
  if (!origin.allFinite() || !direction.allFinite() || std::abs(direction.norm() - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "ray direction must be a unit vector");
  }
}

} // namespace poche
