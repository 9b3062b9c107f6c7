#pragma once

#include "poche/geometry.hpp"

#include <array>
#include <vector>

namespace poche {

/// A closed loop of labelled 2D points. Labels are opaque to the
/// triangulator and are what it returns; equal labels must mean equal points.
struct LabelledLoop {
  std::vector<int> ids;
  std::vector<Vector2> points;
};

/// Triangulates the even-odd region bounded by `loops`. Counter-clockwise
/// loops are outer boundaries, clockwise loops are holes; each hole is bridged
/// into the smallest outer loop that contains it. Output triangles are CCW.
///
/// Collinear boundary points are kept, so every boundary edge of every loop
/// appears in exactly one output triangle, which is what lets caps close a
/// clipped mesh without T-junctions.
std::vector<std::array<int, 3>> triangulate_loops(const std::vector<LabelledLoop>& loops);

} // namespace poche
