#pragma once

// Fixtures and independent oracles shared by the unit tests and the
// acceptance binary. Nothing here calls into the library's geometry code.

#include "poche/model.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace poche::testing {

inline std::filesystem::path data_dir() { return POCHE_TEST_DATA; }

inline TriMesh box_mesh(const Vector3& lo, const Vector3& hi) {
  TriMesh m;
  for (int k = 0; k < 8; ++k) {
    m.vertices.emplace_back(k & 1 ? hi.x() : lo.x(), k & 2 ? hi.y() : lo.y(), k & 4 ? hi.z() : lo.z());
  }
  // Outward winding, two triangles per face.
  const int faces[6][4] = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4}, {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
  for (const auto& f : faces) {
    m.triangles.emplace_back(f[0], f[1], f[2]);
    m.triangles.emplace_back(f[0], f[2], f[3]);
  }
  return m;
}

inline Element element(std::string id, TriMesh mesh, std::optional<int> layer = std::nullopt) {
  Element e;
  e.element_id = std::move(id);
  ElementMesh em;
  em.layered = layer.has_value();
  em.layer.layer_index = layer.value_or(0);
  em.mesh = std::move(mesh);
  e.meshes.push_back(std::move(em));
  return e;
}

inline BuildingModel unit_cube_model() {
  std::vector<Element> es;
  es.push_back(element("cube", box_mesh(Vector3::Zero(), Vector3::Ones())));
  return BuildingModel(std::move(es));
}

// --- convex polytope oracle --------------------------------------------------

/// n . x <= d
struct Halfspace {
  Vector3 n;
  double d;
};

struct Polytope {
  std::vector<Vector3> vertices;
  /// Per face: the supporting halfspace and its vertex indices in CCW order
  /// seen from outside.
  std::vector<std::pair<Halfspace, std::vector<int>>> faces;
};

/// Vertex enumeration by brute-force triple plane intersection.
inline Polytope polytope(const std::vector<Halfspace>& hs, double tol = 1e-9) {
  Polytope p;
  const std::size_t n = hs.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t k = j + 1; k < n; ++k) {
        Matrix3 a;
        a.row(0) = hs[i].n.transpose();
        a.row(1) = hs[j].n.transpose();
        a.row(2) = hs[k].n.transpose();
        if (std::abs(a.determinant()) < 1e-12) {
          continue;
        }
        const Vector3 x = a.fullPivLu().solve(Vector3(hs[i].d, hs[j].d, hs[k].d));
        bool ok = true;
        for (const auto& h : hs) {
          ok = ok && h.n.dot(x) <= h.d + tol;
        }
        if (!ok) {
          continue;
        }
        bool dup = false;
        for (const auto& v : p.vertices) {
          dup = dup || (v - x).norm() < 1e-7;
        }
        if (!dup) {
          p.vertices.push_back(x);
        }
      }
    }
  }
  for (const auto& h : hs) {
    std::vector<int> ids;
    for (std::size_t v = 0; v < p.vertices.size(); ++v) {
      if (std::abs(h.n.dot(p.vertices[v]) - h.d) < 1e-7) {
        ids.push_back(static_cast<int>(v));
      }
    }
    if (ids.size() < 3) {
      continue;
    }
    Vector3 c = Vector3::Zero();
    for (int v : ids) {
      c += p.vertices[v];
    }
    c /= static_cast<double>(ids.size());
    const Vector3 nn = h.n.normalized();
    const Vector3 u = (std::abs(nn.x()) < 0.9 ? Vector3::UnitX() : Vector3::UnitY()).cross(nn).normalized();
    const Vector3 w = nn.cross(u);
    std::sort(ids.begin(), ids.end(), [&](int a, int b) {
      const Vector3 da = p.vertices[a] - c;
      const Vector3 db = p.vertices[b] - c;
      return std::atan2(da.dot(w), da.dot(u)) < std::atan2(db.dot(w), db.dot(u));
    });
    p.faces.push_back({h, ids});
  }
  return p;
}

/// Divergence theorem: V = 1/3 sum_f (n_f . x_f) area_f.
inline double polytope_volume(const Polytope& p) {
  double v = 0;
  for (const auto& [h, ids] : p.faces) {
    const Vector3 nn = h.n.normalized();
    Vector3 twice_area = Vector3::Zero();
    for (std::size_t i = 0; i < ids.size(); ++i) {
      twice_area += p.vertices[ids[i]].cross(p.vertices[ids[(i + 1) % ids.size()]]);
    }
    v += nn.dot(p.vertices[ids[0]]) * 0.5 * std::abs(twice_area.dot(nn)) / 3.0;
  }
  return v;
}

/// Area of the polytope's face lying in halfspace `h`'s plane, 0 if none.
inline double face_area(const Polytope& p, const Vector3& n, double d) {
  for (const auto& [h, ids] : p.faces) {
    if ((h.n.normalized() - n.normalized()).norm() < 1e-9 && std::abs(h.d / h.n.norm() - d / n.norm()) < 1e-9) {
      const Vector3 nn = n.normalized();
      Vector3 twice = Vector3::Zero();
      for (std::size_t i = 0; i < ids.size(); ++i) {
        twice += p.vertices[ids[i]].cross(p.vertices[ids[(i + 1) % ids.size()]]);
      }
      return 0.5 * std::abs(twice.dot(nn));
    }
  }
  return 0.0;
}

/// Fan-triangulated closed surface with shared vertices.
inline TriMesh polytope_mesh(const Polytope& p) {
  TriMesh m;
  m.vertices = p.vertices;
  for (const auto& [h, ids] : p.faces) {
    for (std::size_t i = 1; i + 1 < ids.size(); ++i) {
      m.triangles.emplace_back(ids[0], ids[i], ids[i + 1]);
    }
  }
  return m;
}

/// Random convex body: the cube [-1,1]^3 cut by a few random tangent planes
/// of a sphere of radius 0.8..1, shifted and scaled.
inline std::vector<Halfspace> random_convex(std::mt19937_64& rng, const Vector3& center, double scale) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> r(0.75, 1.0);
  std::vector<Halfspace> hs;
  for (int k = 0; k < 3; ++k) {
    Vector3 e = Vector3::Zero();
    e[k] = 1;
    hs.push_back({e, center[k] + scale});
    hs.push_back({-e, -(center[k] - scale)});
  }
  const int extra = 3 + static_cast<int>(rng() % 5);
  for (int i = 0; i < extra; ++i) {
    Vector3 n(u(rng), u(rng), u(rng));
    if (n.norm() < 0.1) {
      continue;
    }
    n.normalize();
    hs.push_back({n, n.dot(center) + r(rng) * scale});
  }
  return hs;
}

// --- mesh oracles ------------------------------------------------------------

/// Closed two-manifold check by directed edge counting, after merging
/// vertices closer than `tol`.
inline bool closed_surface(const std::vector<Vector3>& verts, const std::vector<Tri>& tris, double tol = 1e-9) {
  std::vector<int> canon(verts.size());
  std::vector<Vector3> reps;
  for (std::size_t i = 0; i < verts.size(); ++i) {
    int found = -1;
    for (std::size_t r = 0; r < reps.size() && found < 0; ++r) {
      if ((reps[r] - verts[i]).norm() <= tol) {
        found = static_cast<int>(r);
      }
    }
    if (found < 0) {
      found = static_cast<int>(reps.size());
      reps.push_back(verts[i]);
    }
    canon[i] = found;
  }
  std::map<std::pair<int, int>, int> directed;
  for (const auto& t : tris) {
    for (int k = 0; k < 3; ++k) {
      ++directed[{canon[t[k]], canon[t[(k + 1) % 3]]}];
    }
  }
  for (const auto& [e, count] : directed) {
    const auto it = directed.find({e.second, e.first});
    if (count != 1 || it == directed.end() || it->second != 1) {
      return false;
    }
  }
  return !tris.empty();
}

inline double mesh_volume(const std::vector<Vector3>& v, const std::vector<Tri>& tris) {
  double s = 0;
  for (const auto& t : tris) {
    s += v[t[0]].dot(v[t[1]].cross(v[t[2]])) / 6.0;
  }
  return s;
}

// --- ray oracle --------------------------------------------------------------

struct BruteHit {
  double t;
  std::string element_id;
  int layer_index;
};

/// Plain Möller–Trumbore with its own tolerance constants.
inline std::optional<double> brute_intersect(
    const Vector3& o, const Vector3& d, const Vector3& a, const Vector3& b, const Vector3& c) {
  const Vector3 e1 = b - a;
  const Vector3 e2 = c - a;
  const Vector3 h = d.cross(e2);
  const double det = e1.dot(h);
  if (std::abs(det) < 1e-14 * e1.norm() * e2.norm()) {
    return std::nullopt;
  }
  const Vector3 s = o - a;
  const double u = s.dot(h) / det;
  const Vector3 q = s.cross(e1);
  const double v = d.dot(q) / det;
  if (u < 0 || v < 0 || u + v > 1) {
    return std::nullopt;
  }
  const double t = e2.dot(q) / det;
  if (t < 0) {
    return std::nullopt;
  }
  return t;
}

inline Vector3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vector3 v(g(rng), g(rng), g(rng));
  return v.normalized();
}

inline Matrix3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  return q.normalized().toRotationMatrix();
}

} // namespace poche::testing
