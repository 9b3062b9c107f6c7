#pragma once

// Scalar-generic geometric primitives shared by clipping, picking, hatching
// and the metric code. Everything here is header-only and free of state.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace poche {

template <typename S>
using Vec2 = Eigen::Matrix<S, 2, 1>;
template <typename S>
using Vec3 = Eigen::Matrix<S, 3, 1>;

using Vector2 = Vec2<double>;
using Vector3 = Vec3<double>;
using Matrix3 = Eigen::Matrix3d;
using Tri = Eigen::Vector3i;
using Box3 = Eigen::AlignedBox3d;

template <typename S>
S triangle_area(const Vec3<S>& a, const Vec3<S>& b, const Vec3<S>& c) {
  return S(0.5) * (b - a).cross(c - a).norm();
}

// Unnormalized normal; zero for degenerate triangles.
template <typename S>
Vec3<S> triangle_normal(const Vec3<S>& a, const Vec3<S>& b, const Vec3<S>& c) {
  return (b - a).cross(c - a);
}

// Signed volume of the tetrahedron (origin, a, b, c). Summed over a closed,
// outward-oriented surface it gives the enclosed volume.
template <typename S>
S signed_tet_volume(const Vec3<S>& a, const Vec3<S>& b, const Vec3<S>& c) {
  return a.dot(b.cross(c)) / S(6);
}

template <typename S>
S cross2(const Vec2<S>& a, const Vec2<S>& b) {
  return a.x() * b.y() - a.y() * b.x();
}

// Twice the signed area of the triangle; positive when counter-clockwise.
template <typename S>
S orient2(const Vec2<S>& a, const Vec2<S>& b, const Vec2<S>& c) {
  return cross2<S>(b - a, c - a);
}

// Shoelace area; positive for counter-clockwise loops.
template <typename S>
S signed_area(std::span<const Vec2<S>> loop) {
  S twice = 0;
  const std::size_t n = loop.size();
  for (std::size_t i = 0; i < n; ++i) {
    twice += cross2<S>(loop[i], loop[(i + 1) % n]);
  }
  return twice / S(2);
}

template <typename S>
S signed_area(const std::vector<Vec2<S>>& loop) {
  return signed_area<S>(std::span<const Vec2<S>>(loop));
}

// Even-odd point-in-polygon over a set of loops (outer and holes alike).
template <typename S>
bool inside_loops(const std::vector<std::vector<Vec2<S>>>& loops, const Vec2<S>& p) {
  bool inside = false;
  for (const auto& loop : loops) {
    const std::size_t n = loop.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const auto& a = loop[i];
      const auto& b = loop[j];
      if ((a.y() > p.y()) != (b.y() > p.y())) {
        const S x = (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x();
        if (p.x() < x) {
          inside = !inside;
        }
      }
    }
  }
  return inside;
}

template <typename S>
struct RayTriangleHit {
  S t;
  S u;
  S v;
};

// Möller–Trumbore, two-sided. Returns hits with t >= 0 only.
template <typename S>
std::optional<RayTriangleHit<S>> intersect_ray_triangle(
    const Vec3<S>& origin,
    const Vec3<S>& dir,
    const Vec3<S>& a,
    const Vec3<S>& b,
    const Vec3<S>& c) {
  const Vec3<S> e1 = b - a;
  const Vec3<S> e2 = c - a;
  const Vec3<S> p = dir.cross(e2);
  const S det = e1.dot(p);
  const S scale = e1.norm() * e2.norm();
  if (std::abs(det) <= std::numeric_limits<S>::epsilon() * scale) {
    return std::nullopt;
  }
  const S inv = S(1) / det;
  const Vec3<S> s = origin - a;
  const S u = s.dot(p) * inv;
  if (u < S(0) || u > S(1)) {
    return std::nullopt;
  }
  const Vec3<S> q = s.cross(e1);
  const S v = dir.dot(q) * inv;
  if (v < S(0) || u + v > S(1)) {
    return std::nullopt;
  }
  const S t = e2.dot(q) * inv;
  if (t < S(0)) {
    return std::nullopt;
  }
  return RayTriangleHit<S>{t, u, v};
}

// Slab test against the ray's t >= 0 half; `pad` grows the box on every side.
template <typename S>
bool intersect_ray_box(
    const Vec3<S>& origin,
    const Vec3<S>& dir,
    const Eigen::AlignedBox<S, 3>& box,
    S pad = S(0)) {
  S t0 = 0;
  S t1 = std::numeric_limits<S>::infinity();
  for (int k = 0; k < 3; ++k) {
    const S lo = box.min()[k] - pad;
    const S hi = box.max()[k] + pad;
    if (dir[k] == S(0)) {
      if (origin[k] < lo || origin[k] > hi) {
        return false;
      }
      continue;
    }
    S a = (lo - origin[k]) / dir[k];
    S b = (hi - origin[k]) / dir[k];
    if (a > b) {
      std::swap(a, b);
    }
    t0 = std::max(t0, a);
    t1 = std::min(t1, b);
    if (t0 > t1) {
      return false;
    }
  }
  return true;
}

} // namespace poche
