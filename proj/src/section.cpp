#include "poche/section.hpp"
#include "poche/triangulate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

namespace poche {

// --- frames ------------------------------------------------------------------

PlaneFrame PlaneFrame::of(Axis axis, Sign sign) {
  const Vector3 X = Vector3::UnitX();
  const Vector3 Y = Vector3::UnitY();
  const Vector3 Z = Vector3::UnitZ();
  switch (axis) {
    case Axis::X: return sign == Sign::Pos ? PlaneFrame{-Y, Z, -X} : PlaneFrame{Y, Z, X};
    case Axis::Y: return sign == Sign::Pos ? PlaneFrame{X, Z, -Y} : PlaneFrame{-X, Z, Y};
    case Axis::Z: return sign == Sign::Pos ? PlaneFrame{X, -Y, -Z} : PlaneFrame{X, Y, Z};
  }
  return PlaneFrame{Y, Z, X};
}

Vector3 PlaneFrame::lift(const Vector2& q, double offset) const {
  Vector3 p = q.x() * u + q.y() * v;
  for (int k = 0; k < 3; ++k) {
    if (normal[k] != 0.0) {
      p[k] = offset;
    }
  }
  return p;
}

// --- result accessors --------------------------------------------------------

double CapPolygon::area() const {
  double a = 0.0;
  for (const auto& loop : loops) {
    a += signed_area(loop);
  }
  return a;
}

namespace {

double volume_of(const std::vector<Vector3>& verts, const std::vector<Tri>& tris, bool reversed = false) {
  double vol = 0.0;
  for (const auto& t : tris) {
    vol += reversed ? signed_tet_volume<double>(verts[t[0]], verts[t[2]], verts[t[1]])
                    : signed_tet_volume<double>(verts[t[0]], verts[t[1]], verts[t[2]]);
  }
  return vol;
}

// Referenced vertices keep their order in `verts`.
TriMesh sub_mesh(const std::vector<Vector3>& verts, const std::vector<Tri>& tris) {
  TriMesh m;
  std::map<int, int> remap;
  for (const auto& t : tris) {
    for (int k = 0; k < 3; ++k) {
      remap.emplace(t[k], 0);
    }
  }
  for (auto& [from, to] : remap) {
    to = static_cast<int>(m.vertices.size());
    m.vertices.push_back(verts[from]);
  }
  for (const auto& t : tris) {
    m.triangles.emplace_back(remap[t[0]], remap[t[1]], remap[t[2]]);
  }
  return m;
}

} // namespace

double ClippedPart::kept_volume() const {
  double vol = volume_of(vertices, kept);
  for (const auto& c : caps) {
    vol += volume_of(vertices, c.triangles);
  }
  return vol;
}

double ClippedPart::discarded_volume() const {
  double vol = volume_of(vertices, discarded);
  for (const auto& c : caps) {
    vol += volume_of(vertices, c.triangles, true);
  }
  return vol;
}

TriMesh ClippedPart::closed_kept() const {
  std::vector<Tri> all = kept;
  for (const auto& c : caps) {
    all.insert(all.end(), c.triangles.begin(), c.triangles.end());
  }
  return sub_mesh(vertices, all);
}

TriMesh ClippedPart::kept_mesh() const { return sub_mesh(vertices, kept); }
TriMesh ClippedPart::discarded_mesh() const { return sub_mesh(vertices, discarded); }

TriMesh ClippedPart::cap_mesh() const {
  std::vector<Tri> all;
  for (const auto& c : caps) {
    all.insert(all.end(), c.triangles.begin(), c.triangles.end());
  }
  return sub_mesh(vertices, all);
}

double SectionResult::kept_volume() const {
  double v = 0.0;
  for (const auto& p : parts) {
    v += p.kept_volume();
  }
  return v;
}

double SectionResult::discarded_volume() const {
  double v = 0.0;
  for (const auto& p : parts) {
    v += p.discarded_volume();
  }
  return v;
}

std::vector<const CapPolygon*> SectionResult::caps() const {
  std::vector<const CapPolygon*> out;
  for (const auto& p : parts) {
    for (const auto& c : p.caps) {
      out.push_back(&c);
    }
  }
  return out;
}

std::vector<const CapPolygon*> SectionResult::caps_on(Axis axis, Sign sign) const {
  std::vector<const CapPolygon*> out;
  for (const auto* c : caps()) {
    if (c->plane.axis == axis && c->plane.sign == sign) {
      out.push_back(c);
    }
  }
  return out;
}

const ClippedPart* SectionResult::part(std::string_view element_id, int layer_index) const {
  for (const auto& p : parts) {
    if (p.element_id == element_id && p.layer_index == layer_index) {
      return &p;
    }
  }
  return nullptr;
}

SectionBox set_plane(const SectionBox& box, Axis axis, Sign sign, double offset, bool active) {
  return box.with_plane(axis, sign, offset, active);
}

std::string layer_key(std::string_view element_id, int layer_index, bool layered) {
  std::string key(element_id);
  if (layered) {
    key += "#" + std::to_string(layer_index);
  }
  return key;
}

LayerTable layer_table(const BuildingModel& model) {
  LayerTable table;
  for (const auto& e : model.elements()) {
    for (const auto& m : e.meshes) {
      table[layer_key(e.element_id, m.layer.layer_index, m.layered)] = m.layer;
    }
  }
  return table;
}

// --- clipping ----------------------------------------------------------------

namespace {

constexpr int kSurface = -1;

struct Work {
  std::vector<Vector3> verts;
  std::vector<Tri> tris;
  std::vector<int> tags;  // kSurface or the plane slot of a cap triangle
};

int slot_of(const SectionPlane& p) {
  return 2 * index_of(p.axis) + static_cast<int>(p.sign);
}

struct Chain {
  std::vector<int> ids;
  bool closed = false;
};

// Chains directed edges into loops. Where several unused edges leave a vertex
// the continuation is the one with the smallest counter-clockwise sweep from
// the outgoing direction back to the incoming edge, which keeps touching
// loops separate.
std::vector<Chain> chain_edges(std::vector<std::pair<int, int>> edges, const std::map<int, Vector2>& uv) {
  std::sort(edges.begin(), edges.end());
  std::multimap<int, std::size_t> outgoing;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    outgoing.emplace(edges[i].first, i);
  }
  std::vector<bool> used(edges.size(), false);
  std::vector<Chain> chains;
  for (std::size_t s = 0; s < edges.size(); ++s) {
    if (used[s]) {
      continue;
    }
    Chain chain;
    const int start = edges[s].first;
    std::size_t e = s;
    chain.ids.push_back(start);
    while (true) {
      used[e] = true;
      const int from = edges[e].first;
      const int to = edges[e].second;
      if (to == start) {
        chain.closed = true;
        break;
      }
      chain.ids.push_back(to);
      std::size_t best = edges.size();
      double best_sweep = std::numeric_limits<double>::infinity();
      const Vector2 back = uv.at(from) - uv.at(to);
      auto [lo, hi] = outgoing.equal_range(to);
      for (auto it = lo; it != hi; ++it) {
        if (used[it->second]) {
          continue;
        }
        const Vector2 out = uv.at(edges[it->second].second) - uv.at(to);
        double sweep = std::atan2(cross2<double>(out, back), out.dot(back));
        if (sweep < 0) {
          sweep += 2.0 * std::numbers::pi;
        }
        if (sweep < best_sweep) {
          best_sweep = sweep;
          best = it->second;
        }
      }
      if (best == edges.size()) {
        break;
      }
      e = best;
    }
    chains.push_back(std::move(chain));
  }
  return chains;
}

// Directed edges of `tris` whose reverse is absent from `tris`.
std::vector<std::pair<int, int>> open_edges(const std::vector<Tri>& tris) {
  std::map<std::pair<int, int>, int> count;
  for (const auto& t : tris) {
    for (int k = 0; k < 3; ++k) {
      ++count[{t[k], t[(k + 1) % 3]}];
    }
  }
  std::vector<std::pair<int, int>> out;
  for (const auto& [e, n] : count) {
    if (!count.contains({e.second, e.first})) {
      for (int i = 0; i < n; ++i) {
        out.push_back(e);
      }
    }
  }
  return out;
}

std::map<int, Vector2> project_ids(const std::vector<std::pair<int, int>>& edges,
                                   const std::vector<Vector3>& verts,
                                   const PlaneFrame& frame) {
  std::map<int, Vector2> uv;
  for (const auto& [a, b] : edges) {
    uv.try_emplace(a, frame.project(verts[a]));
    uv.try_emplace(b, frame.project(verts[b]));
  }
  return uv;
}

void split_by_plane(Work& w, const SectionPlane& plane, std::vector<Tri>& discarded) {
  const int axis = index_of(plane.axis);
  const std::size_t n_old = w.verts.size();
  std::vector<int> cls(n_old);
  std::vector<double> dist(n_old);
  for (std::size_t i = 0; i < n_old; ++i) {
    dist[i] = plane.signed_distance(w.verts[i]);
    cls[i] = dist[i] < -kPlaneEpsilon ? -1 : (dist[i] > kPlaneEpsilon ? 1 : 0);
  }

  std::map<std::pair<int, int>, int> cuts;
  auto cut_vertex = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    if (auto it = cuts.find(key); it != cuts.end()) {
      return it->second;
    }
    const int lo = key.first;
    const int hi = key.second;
    const double t = dist[lo] / (dist[lo] - dist[hi]);
    Vector3 p = w.verts[lo] + t * (w.verts[hi] - w.verts[lo]);
    p[axis] = plane.offset;
    const int id = static_cast<int>(w.verts.size());
    w.verts.push_back(p);
    cuts.emplace(key, id);
    return id;
  };

  std::vector<Tri> tris;
  std::vector<int> tags;
  tris.reserve(w.tris.size());
  tags.reserve(w.tris.size());
  auto keep = [&](const Tri& t, int tag) {
    tris.push_back(t);
    tags.push_back(tag);
  };
  auto drop = [&](const Tri& t, int tag) {
    if (tag == kSurface) {
      discarded.push_back(t);
    }
  };
  auto fan = [](const std::vector<int>& poly, auto&& sink) {
    for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
      sink(Tri(poly[0], poly[k], poly[k + 1]));
    }
  };

  for (std::size_t ti = 0; ti < w.tris.size(); ++ti) {
    const Tri& t = w.tris[ti];
    const int tag = w.tags[ti];
    bool has_in = false;
    bool has_out = false;
    for (int k = 0; k < 3; ++k) {
      has_in |= cls[t[k]] < 0;
      has_out |= cls[t[k]] > 0;
    }
    if (!has_out) {
      if (has_in) {
        keep(t, tag);
      } else {
        // On-plane: a cap of the opposite plane at the same offset stays, so a
        // zero-thickness slab keeps its two coincident caps.
        const Vector3 n = triangle_normal<double>(w.verts[t[0]], w.verts[t[1]], w.verts[t[2]]);
        if (n.dot(plane.normal()) > 0 || tag != kSurface) {
          keep(t, tag);
        } else {
          drop(t, tag);
        }
      }
      continue;
    }
    if (!has_in) {
      drop(t, tag);
      continue;
    }
    std::vector<int> inner;
    std::vector<int> outer;
    for (int k = 0; k < 3; ++k) {
      const int a = t[k];
      const int b = t[(k + 1) % 3];
      if (cls[a] <= 0) {
        inner.push_back(a);
      }
      if (cls[a] >= 0) {
        outer.push_back(a);
      }
      if (cls[a] * cls[b] < 0) {
        const int c = cut_vertex(a, b);
        inner.push_back(c);
        outer.push_back(c);
      }
    }
    fan(inner, [&](const Tri& piece) { keep(piece, tag); });
    fan(outer, [&](const Tri& piece) { drop(piece, tag); });
  }
  w.tris = std::move(tris);
  w.tags = std::move(tags);
}

// Closes the cut left by split_by_plane. Returns false when a profile did not
// close into loops.
bool build_cap(Work& w, const SectionPlane& plane) {
  std::vector<std::pair<int, int>> cap_edges;
  for (const auto& [a, b] : open_edges(w.tris)) {
    if (std::abs(plane.signed_distance(w.verts[a])) <= kPlaneEpsilon &&
        std::abs(plane.signed_distance(w.verts[b])) <= kPlaneEpsilon) {
      cap_edges.emplace_back(b, a);
    }
  }
  if (cap_edges.empty()) {
    return true;
  }
  const int slot = slot_of(plane);
  // Zero-thickness slab: mirror the opposite cap so the pair shares edges.
  const int opposite = slot ^ 1;
  std::vector<Tri> mirrored;
  for (std::size_t i = 0; i < w.tris.size(); ++i) {
    const Tri& t = w.tris[i];
    if (w.tags[i] == opposite && std::abs(plane.signed_distance(w.verts[t[0]])) <= kPlaneEpsilon &&
        std::abs(plane.signed_distance(w.verts[t[1]])) <= kPlaneEpsilon &&
        std::abs(plane.signed_distance(w.verts[t[2]])) <= kPlaneEpsilon) {
      mirrored.emplace_back(w.tris[i][0], w.tris[i][2], w.tris[i][1]);
    }
  }
  if (!mirrored.empty()) {
    for (const auto& t : mirrored) {
      w.tris.push_back(t);
      w.tags.push_back(slot);
    }
    return true;
  }
  const PlaneFrame frame = PlaneFrame::of(plane);
  const auto uv = project_ids(cap_edges, w.verts, frame);
  bool closed = true;
  std::vector<LabelledLoop> loops;
  for (const auto& chain : chain_edges(cap_edges, uv)) {
    closed &= chain.closed;
    if (chain.ids.size() < 3) {
      continue;
    }
    LabelledLoop loop;
    loop.ids = chain.ids;
    for (int id : chain.ids) {
      loop.points.push_back(uv.at(id));
    }
    loops.push_back(std::move(loop));
  }
  for (const auto& t : triangulate_loops(loops)) {
    w.tris.emplace_back(t[0], t[1], t[2]);
    w.tags.push_back(slot);
  }
  return closed;
}

ClippedPart clip_mesh(const Element& element, const ElementMesh& mesh, const SectionBox& box) {
  const TriMesh welded = mesh.mesh.welded();
  const bool watertight = welded.is_watertight();
  Work w{welded.vertices, welded.triangles, std::vector<int>(welded.triangles.size(), kSurface)};

  ClippedPart part;
  part.element_id = element.element_id;
  part.layer_index = mesh.layer.layer_index;
  part.layered = mesh.layered;

  std::array<bool, 6> open{};
  for (const auto& plane : box.planes()) {
    if (!plane.active) {
      continue;
    }
    split_by_plane(w, plane, part.discarded);
    open[slot_of(plane)] = !build_cap(w, plane) || !watertight;
  }

  for (std::size_t i = 0; i < w.tris.size(); ++i) {
    if (w.tags[i] == kSurface) {
      part.kept.push_back(w.tris[i]);
    }
  }
  for (const auto& plane : box.planes()) {
    if (!plane.active) {
      continue;
    }
    const int slot = slot_of(plane);
    CapPolygon cap;
    cap.element_id = part.element_id;
    cap.layer_index = part.layer_index;
    cap.layered = part.layered;
    cap.plane = plane;
    for (std::size_t i = 0; i < w.tris.size(); ++i) {
      if (w.tags[i] == slot) {
        cap.triangles.push_back(w.tris[i]);
      }
    }
    if (cap.triangles.empty()) {
      continue;
    }
    const auto edges = open_edges(cap.triangles);
    const PlaneFrame frame = PlaneFrame::of(plane);
    const auto uv = project_ids(edges, w.verts, frame);
    cap.open_profile = open[slot];
    for (const auto& chain : chain_edges(edges, uv)) {
      cap.open_profile |= !chain.closed;
      std::vector<Vector2> loop;
      for (int id : chain.ids) {
        loop.push_back(uv.at(id));
      }
      cap.loops.push_back(std::move(loop));
    }
    part.caps.push_back(std::move(cap));
  }
  part.vertices = std::move(w.verts);
  return part;
}

} // namespace

SectionResult clip_model(const BuildingModel& model, const SectionBox& box) {
  SectionResult result;
  result.box = box;
  for (const auto& e : model.elements()) {
    for (const auto& m : e.meshes) {
      result.parts.push_back(clip_mesh(e, m, box));
    }
  }
  return result;
}

} // namespace poche
