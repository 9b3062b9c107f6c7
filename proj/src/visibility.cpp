#include "poche/section.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace poche {

std::vector<std::pair<int, int>> feature_edges(const TriMesh& welded, double angle_deg) {
  std::map<std::pair<int, int>, std::vector<std::size_t>> faces;
  for (std::size_t t = 0; t < welded.triangles.size(); ++t) {
    for (int k = 0; k < 3; ++k) {
      const int a = welded.triangles[t][k];
      const int b = welded.triangles[t][(k + 1) % 3];
      faces[{std::min(a, b), std::max(a, b)}].push_back(t);
    }
  }
  const double cos_limit = std::cos(angle_deg * std::numbers::pi / 180.0);
  std::vector<std::pair<int, int>> out;
  for (const auto& [edge, tris] : faces) {
    if (tris.size() != 2 || welded.normal(tris[0]).dot(welded.normal(tris[1])) < cos_limit) {
      out.push_back(edge);
    }
  }
  return out;
}

namespace {

struct Occluder {
  const TriMesh* mesh;
  Tri tri;
  Vector3 a, b, c;
};

// Parameter in (0,1) where segment ab crosses the plane n.(x - p) = 0.
void crossing(const Vector3& a, const Vector3& b, const Vector3& n, const Vector3& p, std::vector<double>& ts) {
  const double da = n.dot(a - p);
  const double db = n.dot(b - p);
  if ((da > 0 && db < 0) || (da < 0 && db > 0)) {
    const double t = da / (da - db);
    if (t > 0 && t < 1) {
      ts.push_back(t);
    }
  }
}

bool incident(const Occluder& o, const TriMesh* mesh, int i, int j) {
  if (o.mesh != mesh) {
    return false;
  }
  const auto has = [&](int v) { return o.tri[0] == v || o.tri[1] == v || o.tri[2] == v; };
  return has(i) && has(j);
}

} // namespace

EdgeVisibility edge_visibility(const BuildingModel& model, const CameraPose& camera, double angle_deg) {
  camera.validate();
  const Vector3& eye = camera.position;

  struct Source {
    const Element* element;
    const ElementMesh* mesh;
    TriMesh welded;
  };
  std::vector<Source> sources;
  for (const auto& e : model.elements()) {
    for (const auto& m : e.meshes) {
      sources.push_back({&e, &m, m.mesh.welded()});
    }
  }
  std::vector<Occluder> occluders;
  for (const auto& s : sources) {
    for (const auto& t : s.welded.triangles) {
      occluders.push_back({&s.welded, t, s.welded.vertices[t[0]], s.welded.vertices[t[1]], s.welded.vertices[t[2]]});
    }
  }

  EdgeVisibility out;
  for (const auto& s : sources) {
    for (const auto& [i, j] : feature_edges(s.welded, angle_deg)) {
      const Vector3 a = s.welded.vertices[i];
      const Vector3 b = s.welded.vertices[j];
      // Occlusion can only change where the edge's projection crosses an
      // occluder edge, where the edge pierces an occluder, or at the camera plane.
      std::vector<double> ts{0.0, 1.0};
      crossing(a, b, camera.forward(), eye, ts);
      for (const auto& o : occluders) {
        if (incident(o, &s.welded, i, j)) {
          continue;
        }
        const Vector3* corners[3] = {&o.a, &o.b, &o.c};
        for (int k = 0; k < 3; ++k) {
          const Vector3 n = (*corners[k] - eye).cross(*corners[(k + 1) % 3] - eye);
          if (n.squaredNorm() > 0) {
            crossing(a, b, n, eye, ts);
          }
        }
        const Vector3 n = (o.b - o.a).cross(o.c - o.a);
        crossing(a, b, n, o.a, ts);
      }
      std::sort(ts.begin(), ts.end());
      ts.erase(std::unique(ts.begin(), ts.end(), [](double x, double y) { return y - x <= 1e-12; }), ts.end());
      if (ts.back() != 1.0) {
        ts.back() = 1.0;
      }

      std::optional<bool> state;
      double run_start = 0.0;
      auto flush = [&](double end) {
        if (!state || end <= run_start) {
          return;
        }
        EdgeSegment seg{s.element->element_id, s.mesh->layer.layer_index, a + run_start * (b - a),
                        a + end * (b - a)};
        (*state ? out.visible : out.hidden).push_back(std::move(seg));
      };
      for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
        const Vector3 m = a + 0.5 * (ts[k] + ts[k + 1]) * (b - a);
        bool visible = camera.depth(m) > 0;
        if (visible) {
          const Vector3 d = m - eye;
          const double dist = d.norm();
          const Vector3 dir = d / dist;
          const double limit = dist - 1e-9 * std::max(1.0, dist);
          for (const auto& o : occluders) {
            if (incident(o, &s.welded, i, j)) {
              continue;
            }
            const auto hit = intersect_ray_triangle<double>(eye, dir, o.a, o.b, o.c);
            if (hit && hit->t < limit) {
              visible = false;
              break;
            }
          }
        }
        if (state != visible) {
          flush(ts[k]);
          state = visible;
          run_start = ts[k];
        }
      }
      flush(1.0);
    }
  }
  return out;
}

} // namespace poche
