#include "poche/ingest.hpp"
#include "poche/section.hpp"

#include <algorithm>
#include <cstdio>

namespace poche {
namespace {

std::string mm(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  std::string s(buf);
  if (s == "-0.0") {
    s = "0.0";
  }
  return s;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Stroke widths sit below the 0.1 mm grid, so they get their own format.
std::string stroke(double width_mm) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", width_mm);
  return buf;
}

struct Sheet {
  double umin = 0, vmax = 0, margin = 0;
  std::string point(const Vector2& q) const {
    return mm((q.x() - umin) * 1000.0 + margin) + " " + mm((vmax - q.y()) * 1000.0 + margin);
  }
};

bool sheet_equal(const Vector2& a, const Vector2& b) {
  return mm(a.x() * 1000.0) == mm(b.x() * 1000.0) && mm(a.y() * 1000.0) == mm(b.y() * 1000.0);
}

std::vector<const ClippedPart*> ordered_parts(const SectionResult& result) {
  std::vector<const ClippedPart*> parts;
  for (const auto& p : result.parts) {
    parts.push_back(&p);
  }
  std::stable_sort(parts.begin(), parts.end(), [](const ClippedPart* a, const ClippedPart* b) {
    return std::tie(a->element_id, a->layer_index) < std::tie(b->element_id, b->layer_index);
  });
  return parts;
}

} // namespace

std::string export_svg(const SectionResult& result, Axis axis, Sign sign, const SvgStyle& style) {
  const SectionPlane& plane = result.box.plane(axis, sign);
  if (!plane.active) {
    throw Error(ErrorCode::NoSection, "plane " + plane_name(axis, sign) + " is not active");
  }
  const PlaneFrame frame = PlaneFrame::of(plane);
  const auto parts = ordered_parts(result);

  // Kept feature edges off the cut plane, projected orthographically.
  struct PartEdges {
    const ClippedPart* part;
    std::vector<std::pair<Vector2, Vector2>> edges;
  };
  std::vector<PartEdges> edge_sets;
  Eigen::AlignedBox2d extent;
  for (const ClippedPart* part : parts) {
    PartEdges pe{part, {}};
    const TriMesh closed = part->closed_kept();
    for (const auto& [a, b] : feature_edges(closed)) {
      const Vector3& pa = closed.vertices[a];
      const Vector3& pb = closed.vertices[b];
      if (std::abs(plane.signed_distance(pa)) <= kPlaneEpsilon && std::abs(plane.signed_distance(pb)) <= kPlaneEpsilon) {
        continue;
      }
      const Vector2 qa = frame.project(pa);
      const Vector2 qb = frame.project(pb);
      // Edges along the view direction collapse to a point.
      if (sheet_equal(qa, qb)) {
        continue;
      }
      pe.edges.emplace_back(qa, qb);
      extent.extend(pe.edges.back().first);
      extent.extend(pe.edges.back().second);
    }
    edge_sets.push_back(std::move(pe));
    for (const auto& cap : part->caps) {
      if (cap.plane.axis == axis && cap.plane.sign == sign) {
        for (const auto& loop : cap.loops) {
          for (const auto& q : loop) {
            extent.extend(q);
          }
        }
      }
    }
  }
  if (extent.isEmpty()) {
    extent.extend(Vector2::Zero());
  }

  const Sheet sheet{extent.min().x(), extent.max().y(), style.margin_mm};
  const double width = extent.sizes().x() * 1000.0 + 2 * style.margin_mm;
  const double height = extent.sizes().y() * 1000.0 + 2 * style.margin_mm;

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + mm(width) + "mm\" height=\"" +
         mm(height) + "mm\" viewBox=\"0 0 " + mm(width) + " " + mm(height) + "\">\n";
  out += "<title>section " + plane_name(axis, sign) + " at " + mm(plane.offset * 1000.0) + " mm</title>\n";

  out += "<g id=\"edges\" fill=\"none\" stroke=\"#000000\" stroke-width=\"" + stroke(style.edge_stroke_mm) + "\">\n";
  for (const auto& pe : edge_sets) {
    if (pe.edges.empty()) {
      continue;
    }
    std::string d;
    for (const auto& [a, b] : pe.edges) {
      d += (d.empty() ? "M " : " M ") + sheet.point(a) + " L " + sheet.point(b);
    }
    out += "<path data-element=\"" + xml_escape(pe.part->element_id) + "\" data-layer=\"" +
           std::to_string(pe.part->layer_index) + "\" fill=\"none\" d=\"" + d + "\"/>\n";
  }
  out += "</g>\n";

  out += "<g id=\"poche\" stroke=\"#000000\" stroke-width=\"" + stroke(style.cap_stroke_mm) + "\">\n";
  for (const ClippedPart* part : parts) {
    for (const auto& cap : part->caps) {
      if (cap.plane.axis != axis || cap.plane.sign != sign || cap.loops.empty()) {
        continue;
      }
      std::string d;
      for (const auto& loop : cap.loops) {
        for (std::size_t i = 0; i < loop.size(); ++i) {
          d += (i == 0 ? (d.empty() ? "M " : " M ") : " L ") + sheet.point(loop[i]);
        }
        d += " Z";
      }
      out += "<path class=\"cap\" data-element=\"" + xml_escape(cap.element_id) + "\" data-layer=\"" +
             std::to_string(cap.layer_index) + "\" fill=\"#d9d9d9\" fill-rule=\"evenodd\" d=\"" + d + "\"/>\n";
      if (!cap.hatch.empty()) {
        std::string h;
        for (const auto& s : cap.hatch) {
          h += (h.empty() ? "M " : " M ") + sheet.point(s.a) + " L " + sheet.point(s.b);
        }
        out += "<path class=\"hatch\" data-element=\"" + xml_escape(cap.element_id) + "\" data-layer=\"" +
                 std::to_string(cap.layer_index) + "\" fill=\"none\" stroke-width=\"" + stroke(style.hatch_stroke_mm) +
               "\" d=\"" + h + "\"/>\n";
      }
    }
  }
  out += "</g>\n</svg>\n";
  return out;
}

std::string export_mesh(const SectionResult& result, MeshSide side) {
  std::vector<ObjGroup> groups;
  for (const ClippedPart& part : result.parts) {
    TriMesh mesh;
    switch (side) {
      case MeshSide::Kept: mesh = part.kept_mesh(); break;
      case MeshSide::Discarded: mesh = part.discarded_mesh(); break;
      case MeshSide::Caps: mesh = part.cap_mesh(); break;
    }
    if (!mesh.triangles.empty()) {
      groups.push_back({layer_key(part.element_id, part.layer_index, part.layered), std::move(mesh)});
    }
  }
  return write_obj(groups);
}

} // namespace poche
