#include "poche/section.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace poche {
namespace {

using Loops = std::vector<std::vector<Vector2>>;

// Hatch rows sit at offset k * spacing from the region's minimum extent along
// the row normal and keep at least one spacing of clearance at both ends,
// which avoids slivers at corners.
std::vector<double> row_offsets(const Loops& loops, const Vector2& normal, double spacing) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& loop : loops) {
    for (const auto& p : loop) {
      lo = std::min(lo, normal.dot(p));
      hi = std::max(hi, normal.dot(p));
    }
  }
  std::vector<double> rows;
  if (!(hi > lo) || !(spacing > 0)) {
    return rows;
  }
  const double tol = 1e-9 * std::max(1.0, hi - lo);
  for (int k = 1;; ++k) {
    const double c = lo + k * spacing;
    if (c > hi - spacing + tol) {
      break;
    }
    rows.push_back(c);
  }
  return rows;
}

void line_family(const Loops& loops, double angle, double spacing, std::vector<HatchSegment>& out) {
  const Vector2 dir(std::cos(angle), std::sin(angle));
  const Vector2 normal(-dir.y(), dir.x());
  for (double c : row_offsets(loops, normal, spacing)) {
    std::vector<double> ts;
    for (const auto& loop : loops) {
      const std::size_t n = loop.size();
      for (std::size_t i = 0; i < n; ++i) {
        const Vector2& a = loop[i];
        const Vector2& b = loop[(i + 1) % n];
        const double ca = normal.dot(a) - c;
        const double cb = normal.dot(b) - c;
        if ((ca > 0) != (cb > 0)) {
          const double s = ca / (ca - cb);
          ts.push_back(dir.dot(a) + s * (dir.dot(b) - dir.dot(a)));
        }
      }
    }
    std::sort(ts.begin(), ts.end());
    for (std::size_t i = 0; i + 1 < ts.size(); i += 2) {
      if (ts[i + 1] > ts[i]) {
        out.push_back({c * normal + ts[i] * dir, c * normal + ts[i + 1] * dir});
      }
    }
  }
}

// Pieces of segment ab inside the even-odd region.
void clip_segment(const Loops& loops, const Vector2& a, const Vector2& b, std::vector<HatchSegment>& out) {
  std::vector<double> ts{0.0, 1.0};
  const Vector2 d = b - a;
  for (const auto& loop : loops) {
    const std::size_t n = loop.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vector2& p = loop[i];
      const Vector2 e = loop[(i + 1) % n] - p;
      const double den = cross2<double>(d, e);
      if (den == 0.0) {
        continue;
      }
      const double t = cross2<double>(p - a, e) / den;
      const double s = cross2<double>(p - a, d) / den;
      if (t > 0 && t < 1 && s >= 0 && s <= 1) {
        ts.push_back(t);
      }
    }
  }
  std::sort(ts.begin(), ts.end());
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    if (ts[i + 1] - ts[i] <= 1e-12) {
      continue;
    }
    const Vector2 mid = a + 0.5 * (ts[i] + ts[i + 1]) * d;
    if (inside_loops(loops, mid)) {
      out.push_back({a + ts[i] * d, a + ts[i + 1] * d});
    }
  }
}

std::pair<double, double> extent(const Loops& loops, const Vector2& axis) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& loop : loops) {
    for (const auto& p : loop) {
      lo = std::min(lo, axis.dot(p));
      hi = std::max(hi, axis.dot(p));
    }
  }
  return {lo, hi};
}

void zigzag(const Loops& loops, double spacing, std::vector<HatchSegment>& out) {
  const auto [u0, u1] = extent(loops, Vector2::UnitX());
  const double step = spacing / 2;
  const double amp = spacing / 4;
  for (double v : row_offsets(loops, Vector2::UnitY(), spacing)) {
    for (int i = 0; u0 + i * step < u1; ++i) {
      const Vector2 a(u0 + i * step, v + (i % 2 == 0 ? -amp : amp));
      const Vector2 b(u0 + (i + 1) * step, v + (i % 2 == 0 ? amp : -amp));
      clip_segment(loops, a, b, out);
    }
  }
}

void dots(const Loops& loops, double spacing, std::vector<HatchSegment>& out) {
  const double half = spacing / 20;
  const auto columns = row_offsets(loops, Vector2::UnitX(), spacing);
  for (double v : row_offsets(loops, Vector2::UnitY(), spacing)) {
    for (double u : columns) {
      clip_segment(loops, Vector2(u - half, v), Vector2(u + half, v), out);
    }
  }
}

} // namespace

std::vector<HatchSegment> hatch_region(const Loops& loops, Hatch pattern, double spacing) {
  std::vector<HatchSegment> out;
  constexpr double quarter = std::numbers::pi / 4;
  switch (pattern) {
    case Hatch::Diagonal45:
      line_family(loops, quarter, spacing, out);
      break;
    case Hatch::Crosshatch:
      line_family(loops, quarter, spacing, out);
      line_family(loops, 3 * quarter, spacing, out);
      break;
    case Hatch::Zigzag:
      zigzag(loops, spacing, out);
      break;
    case Hatch::Dots:
      dots(loops, spacing, out);
      break;
    case Hatch::Solid:
    case Hatch::None:
      break;
  }
  return out;
}

SectionResult generate_poche(SectionResult result, const LayerTable& layers, const HatchStyle& style) {
  for (auto& part : result.parts) {
    for (auto& cap : part.caps) {
      const auto it = layers.find(layer_key(cap.element_id, cap.layer_index, cap.layered));
      if (it == layers.end()) {
        throw Error(ErrorCode::LayerRefError,
                    "no layer spec for '" + layer_key(cap.element_id, cap.layer_index, cap.layered) + "'");
      }
      cap.hatch = hatch_region(cap.loops, it->second.hatch, style.spacing);
    }
  }
  return result;
}

} // namespace poche
