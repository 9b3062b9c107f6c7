#include "poche/section.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace poche {

std::string_view to_string(RenderLayer layer) {
  switch (layer) {
    case RenderLayer::KeptSolid: return "KeptSolid";
    case RenderLayer::DiscardedWireframe: return "DiscardedWireframe";
    case RenderLayer::CapPoche: return "CapPoche";
    case RenderLayer::RevealSolid: return "RevealSolid";
    case RenderLayer::HighlightRedWire: return "HighlightRedWire";
    case RenderLayer::HighlightRedSolid: return "HighlightRedSolid";
  }
  return "KeptSolid";
}

std::string_view to_string(ViewMode mode) {
  switch (mode) {
    case ViewMode::Inspect: return "inspect";
    case ViewMode::Section: return "section";
    case ViewMode::Reveal: return "reveal";
  }
  return "inspect";
}

std::optional<ViewMode> parse_view_mode(std::string_view name) {
  for (ViewMode m : {ViewMode::Inspect, ViewMode::Section, ViewMode::Reveal}) {
    if (to_string(m) == name) {
      return m;
    }
  }
  return std::nullopt;
}

std::size_t RenderLayerSet::triangle_count(RenderLayer layer) const {
  std::size_t n = 0;
  if (auto it = layers.find(layer); it != layers.end()) {
    for (const auto& b : it->second) {
      n += b.triangles.size();
    }
  }
  return n;
}

std::size_t RenderLayerSet::triangle_count() const {
  std::size_t n = 0;
  for (RenderLayer l : kAllRenderLayers) {
    n += triangle_count(l);
  }
  return n;
}

namespace {

GeometryBatch make_batch(const ClippedPart& part, const std::vector<const std::vector<Tri>*>& sources) {
  GeometryBatch batch;
  batch.element_id = part.element_id;
  batch.layer_index = part.layer_index;
  std::map<int, int> remap;
  for (const auto* tris : sources) {
    for (const auto& t : *tris) {
      Tri out;
      for (int k = 0; k < 3; ++k) {
        auto [it, inserted] = remap.try_emplace(t[k], static_cast<int>(batch.positions.size()));
        if (inserted) {
          batch.positions.push_back(part.vertices[t[k]]);
        }
        out[k] = it->second;
      }
      batch.triangles.push_back(out);
    }
  }
  return batch;
}

void add(RenderLayerSet& set, RenderLayer layer, GeometryBatch batch) {
  if (!batch.triangles.empty()) {
    set.layers[layer].push_back(std::move(batch));
  }
}

std::set<std::string> reveal_context(const SectionResult& result, const CameraPose& camera) {
  std::set<std::string> context;
  double cut_depth = -std::numeric_limits<double>::infinity();
  std::set<std::string> cut_elements;
  for (const auto& part : result.parts) {
    for (const auto& cap : part.caps) {
      cut_elements.insert(part.element_id);
      for (const auto& t : cap.triangles) {
        for (int k = 0; k < 3; ++k) {
          cut_depth = std::max(cut_depth, camera.depth(part.vertices[t[k]]));
        }
      }
    }
  }
  if (cut_elements.empty()) {
    return context;
  }
  std::map<std::string, double> nearest;
  for (const auto& part : result.parts) {
    for (const auto& t : part.kept) {
      for (int k = 0; k < 3; ++k) {
        const double d = camera.depth(part.vertices[t[k]]);
        auto [it, inserted] = nearest.try_emplace(part.element_id, d);
        if (!inserted) {
          it->second = std::min(it->second, d);
        }
      }
    }
  }
  for (const auto& [id, depth] : nearest) {
    if (!cut_elements.contains(id) && depth > cut_depth) {
      context.insert(id);
    }
  }
  return context;
}

} // namespace

RenderLayerSet classify_layers(
    const SectionResult& result,
    ViewMode mode,
    const std::optional<HighlightSpec>& highlight,
    const std::optional<CameraPose>& camera) {
  const bool has_highlight = highlight.has_value() && highlight->style != HighlightStyle::None;
  if (has_highlight) {
    const bool known = std::any_of(result.parts.begin(), result.parts.end(), [&](const ClippedPart& p) {
      return p.element_id == highlight->element_id;
    });
    if (!known) {
      throw Error(ErrorCode::UnknownElement, "highlight names unknown element '" + highlight->element_id + "'");
    }
  }
  auto highlighted = [&](const ClippedPart& p) {
    return has_highlight && p.element_id == highlight->element_id &&
           (!highlight->layer_index || *highlight->layer_index == p.layer_index);
  };

  std::set<std::string> context;
  if (mode == ViewMode::Reveal) {
    if (!camera) {
      throw Error(ErrorCode::InvalidArgument, "reveal mode needs a camera");
    }
    context = reveal_context(result, *camera);
  }

  RenderLayerSet out;
  for (RenderLayer l : kAllRenderLayers) {
    out.layers[l];
  }
  for (const auto& part : result.parts) {
    if (mode == ViewMode::Inspect) {
      add(out, highlighted(part) ? RenderLayer::HighlightRedWire : RenderLayer::KeptSolid,
          make_batch(part, {&part.kept, &part.discarded}));
      continue;
    }
    RenderLayer kept_layer = RenderLayer::KeptSolid;
    if (highlighted(part)) {
      kept_layer = RenderLayer::HighlightRedSolid;
    } else if (context.contains(part.element_id)) {
      kept_layer = RenderLayer::RevealSolid;
    }
    add(out, kept_layer, make_batch(part, {&part.kept}));
    add(out, RenderLayer::DiscardedWireframe, make_batch(part, {&part.discarded}));
    for (const auto& cap : part.caps) {
      add(out, RenderLayer::CapPoche, make_batch(part, {&cap.triangles}));
    }
  }
  return out;
}

} // namespace poche
