#include "poche/cli.hpp"

#include "poche/ingest.hpp"
#include "poche/metastore.hpp"
#include "poche/picking.hpp"
#include "poche/section.hpp"
#include "poche/service.hpp"
#include "poche/spatial.hpp"
#include "poche/study.hpp"
#include "poche/wire.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace poche::cli {
namespace {

namespace fs = std::filesystem;

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s(buf);
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') {
    s.erase(0, 1);
  }
  return s;
}

Vector3 parse_triple(const std::string& text, const char* flag) {
  Vector3 v;
  std::istringstream in(text);
  std::string part;
  int k = 0;
  while (std::getline(in, part, ',')) {
    if (k == 3) {
      throw CLI::ValidationError(flag, "expected x,y,z");
    }
    try {
      std::size_t used = 0;
      v[k] = std::stod(part, &used);
      if (used != part.size()) {
        throw std::invalid_argument(part);
      }
    } catch (const std::exception&) {
      throw CLI::ValidationError(flag, "'" + text + "' is not x,y,z");
    }
    ++k;
  }
  if (k != 3) {
    throw CLI::ValidationError(flag, "expected x,y,z");
  }
  return v;
}

struct Planes {
  std::array<std::optional<double>, 6> offsets;

  void add_to(CLI::App* app) {
    const char* names[6] = {"--x-pos", "--x-neg", "--y-pos", "--y-neg", "--z-pos", "--z-neg"};
    for (int i = 0; i < 6; ++i) {
      app->add_option(names[i], offsets[i], "Activate this section plane at the given offset (m)");
    }
  }

  SectionBox apply(const BuildingModel& model) const {
    SectionBox box = SectionBox::around(aabb(model));
    for (int i = 0; i < 6; ++i) {
      if (offsets[i]) {
        box = set_plane(box, static_cast<Axis>(i / 2), static_cast<Sign>(i % 2), *offsets[i], true);
      }
    }
    return box;
  }
};

struct ModelInputs {
  std::string model_path;
  std::string layers_path;
  std::string meta_path;

  void add_to(CLI::App* app, bool meta) {
    app->add_option("--model", model_path, "Geometry file (OBJ subset)")->required()->check(CLI::ExistingFile);
    app->add_option("--layers", layers_path, "Layer sidecar JSON")->check(CLI::ExistingFile);
    if (meta) {
      app->add_option("--meta", meta_path, "Metadata store JSON or metadata CSV")->check(CLI::ExistingFile);
    }
  }

  LayerTable sidecar() const { return layers_path.empty() ? LayerTable{} : load_layer_sidecar(layers_path); }

  BuildingModel model() const {
    if (layers_path.empty()) {
      return load_geometry(model_path);
    }
    const LayerTable table = sidecar();
    return load_geometry(model_path, &table);
  }

  MetadataStore store() const {
    if (meta_path.empty()) {
      return {};
    }
    if (fs::path(meta_path).extension() == ".csv") {
      return store_from_rows(parse_metadata_csv(meta_path));
    }
    return load_store(meta_path);
  }
};

// --- subcommands -------------------------------------------------------------

struct IngestCmd {
  ModelInputs in;
  std::string csv_path;
  std::string out_path;
  bool strict = false;

  int run(bool json, std::ostream& out, std::ostream& err) const {
    const BuildingModel model = in.model();
    const auto rows = parse_metadata_csv(csv_path);
    const auto doc = csv_to_json(rows);
    const ValidationReport report = validate_model(model, rows);
    std::ostream& report_out = out_path.empty() ? err : out;
    if (out_path.empty()) {
      out << dump_metadata_json(doc);
    } else {
      write_file(out_path, dump_metadata_json(doc));
    }
    if (json) {
      report_out << wire::validation_json(report).dump(2) << "\n";
    } else {
      report_out << "elements: " << report.element_count << "\n"
                 << "metadata rows: " << report.row_count << "\n";
      auto list = [&](const char* label, const std::vector<std::string>& ids) {
        report_out << label << ": " << ids.size();
        for (const auto& id : ids) {
          report_out << " " << id;
        }
        report_out << "\n";
      };
      list("geometry without metadata", report.orphan_geometry_ids);
      list("metadata without geometry", report.orphan_metadata_ids);
      list("duplicate rows", report.duplicate_rows);
      report_out << (report.clean() ? "clean" : "problems found") << "\n";
    }
    return strict && !report.clean() ? kExitData : kExitOk;
  }
};

struct SliceCmd {
  ModelInputs in;
  Planes planes;
  std::string svg_path;
  std::string obj_path;
  std::string side = "kept";
  std::string view;
  double spacing = 0.05;

  int run(bool json, std::ostream& out, std::ostream&) const {
    const BuildingModel model = in.model();
    const SectionBox box = planes.apply(model);
    const SectionResult result = generate_poche(clip_model(model, box), layer_table(model), HatchStyle{spacing});

    std::optional<std::pair<Axis, Sign>> view_plane;
    if (!view.empty()) {
      view_plane = parse_plane_name(view);
    } else {
      for (const auto& p : box.planes()) {
        if (p.active) {
          view_plane = std::pair{p.axis, p.sign};
          break;
        }
      }
    }
    if (!svg_path.empty()) {
      if (!view_plane) {
        throw Error(ErrorCode::NoSection, "no active plane to draw");
      }
      write_file(svg_path, export_svg(result, view_plane->first, view_plane->second));
    }
    if (!obj_path.empty()) {
      const MeshSide s = side == "discarded" ? MeshSide::Discarded : side == "caps" ? MeshSide::Caps : MeshSide::Kept;
      write_file(obj_path, export_mesh(result, s));
    }

    const auto caps = result.caps();
    if (json) {
      nlohmann::json j;
      j["box"] = wire::section_box_json(box);
      j["kept_volume"] = result.kept_volume();
      j["discarded_volume"] = result.discarded_volume();
      nlohmann::json cj = nlohmann::json::array();
      for (const CapPolygon* c : caps) {
        cj.push_back({{"element_id", c->element_id},
                      {"layer_index", c->layer_index},
                      {"plane", plane_name(c->plane.axis, c->plane.sign)},
                      {"area", c->area()},
                      {"loops", c->loops.size()},
                      {"hatch_segments", c->hatch.size()},
                      {"open_profile", c->open_profile}});
      }
      j["caps"] = std::move(cj);
      out << j.dump(2) << "\n";
      return kExitOk;
    }
    out << "kept volume: " << fixed(result.kept_volume(), 6) << " m3\n"
        << "discarded volume: " << fixed(result.discarded_volume(), 6) << " m3\n"
        << "caps: " << caps.size() << "\n";
    for (const CapPolygon* c : caps) {
      out << "  " << layer_key(c->element_id, c->layer_index, c->layered) << " "
          << plane_name(c->plane.axis, c->plane.sign) << " area " << fixed(c->area(), 6) << " m2, "
          << c->hatch.size() << " hatch segments" << (c->open_profile ? ", open profile" : "") << "\n";
    }
    return kExitOk;
  }
};

struct PickCmd {
  ModelInputs in;
  Planes planes;
  std::string origin;
  std::string dir;
  std::string poche_plane;
  std::string mode = "section";

  int run(bool json, std::ostream& out, std::ostream&) const {
    const BuildingModel model = in.model();
    const MetadataStore store = in.store();
    const SectionBox box = planes.apply(model);
    const SectionResult result = clip_model(model, box);
    Ray ray{parse_triple(origin, "--origin"), parse_triple(dir, "--dir")};
    std::optional<SectionPlane> toggle;
    if (!poche_plane.empty()) {
      const auto p = parse_plane_name(poche_plane);
      toggle = box.plane(p->first, p->second);
    }
    const PickResult pick = resolve_pick(cast_ray(result, ray), toggle);
    std::optional<HighlightSpec> highlight;
    if (pick.hit) {
      highlight = highlight_for(pick, model, box, *parse_view_mode(mode));
    }
    const LayerTable layers = layer_table(model);
    if (json) {
      out << wire::pick_response(pick, highlight, store, layers).dump(2) << "\n";
      return kExitOk;
    }
    if (!pick.hit) {
      out << "no hit\n";
      return kExitOk;
    }
    const RayHit& h = *pick.hit;
    out << "element: " << pick.element_id << "\n"
        << "layer: " << h.layer_index << "\n"
        << "source: " << to_string(h.source) << (pick.is_poche ? " (poche)" : "") << "\n"
        << "distance: " << fixed(h.distance, 6) << " m\n";
    if (auto it = layers.find(layer_key(h.element_id, h.layer_index, h.layered)); it != layers.end()) {
      out << "material: " << it->second.material_name << "\n";
    }
    if (const auto rec = store.get(pick.element_id)) {
      out << "category: " << rec->category << "\n" << "family: " << rec->family << "\n";
      for (const auto& [k, v] : rec->parameters) {
        out << "  " << k << " = " << v << "\n";
      }
    }
    return kExitOk;
  }
};

struct AlignCmd {
  std::string path;

  int run(bool json, std::ostream& out, std::ostream&) const {
    const AlignmentSummary summary = summarize_alignment(parse_annotations(read_file(path)));
    if (json) {
      out << wire::alignment_json(summary).dump(2) << "\n";
      return kExitOk;
    }
    for (std::size_t i = 0; i < summary.per_image.size(); ++i) {
      const auto& r = summary.per_image[i];
      out << "image " << i + 1 << ": scale " << fixed(r.scale_mm_per_px, 4) << " mm/px, mean "
          << fixed(r.mean_mm, 2) << " mm, max " << fixed(r.max_mm, 2) << " mm (" << r.errors_mm.size()
          << " samples)\n";
    }
    out << "mean of image means: " << fixed(summary.mean_of_images_mm, 2) << " mm\n"
        << "pooled mean: " << fixed(summary.pooled_mean_mm, 2) << " mm\n"
        << "max: " << fixed(summary.max_mm, 2) << " mm\n";
    return kExitOk;
  }
};

struct AnalyzeCmd {
  std::string path;

  int run(bool json, std::ostream& out, std::ostream&) const {
    const CohortSummary summary = cohort_summary(parse_study_csv(read_file(path)));
    out << (json ? cohort_json(summary).dump(2) + "\n" : format_cohort_text(summary));
    return kExitOk;
  }
};

struct TlxCmd {
  std::string path;

  int run(bool json, std::ostream& out, std::ostream&) const {
    const TlxSummary summary = tlx_summary(parse_tlx_csv(read_file(path)));
    out << (json ? tlx_json(summary).dump(2) + "\n" : format_tlx_text(summary));
    return kExitOk;
  }
};

struct ServeCmd {
  ModelInputs in;
  std::string host = "127.0.0.1";
  int port = kDefaultPort;
  std::string ui_dir;

  int run(std::ostream& out, std::ostream&) const {
    Service service(in.model(), in.store(), layer_table(in.model()));
    std::optional<fs::path> ui;
    if (!ui_dir.empty()) {
      ui = ui_dir;
    }
    HttpServer server(service, ui);
    out << "serving on http://" << host << ":" << port << "/api/v1/" << std::endl;
    server.run(host, port);
    return kExitOk;
  }
};

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app("Section-view engine and study analytics", "poche");
  app.require_subcommand(1);
  bool json = false;
  app.add_flag("--json", json, "Print reports as JSON");

  IngestCmd ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Validate geometry against metadata and emit metadata JSON");
  ingest.in.add_to(c_ingest, false);
  c_ingest->add_option("--csv", ingest.csv_path, "Metadata CSV")->required()->check(CLI::ExistingFile);
  c_ingest->add_option("--out", ingest.out_path, "Write metadata JSON here instead of stdout");
  c_ingest->add_flag("--strict", ingest.strict, "Exit 2 when the validation report is not clean");

  SliceCmd slice;
  auto* c_slice = app.add_subcommand("slice", "Clip the model and export drawings or meshes");
  slice.in.add_to(c_slice, false);
  slice.planes.add_to(c_slice);
  c_slice->add_option("--svg", slice.svg_path, "Write a section drawing");
  c_slice->add_option("--view", slice.view, "Plane to draw (default: first active)")
      ->check([](const std::string& s) { return parse_plane_name(s) ? "" : "unknown plane '" + s + "'"; });
  c_slice->add_option("--obj", slice.obj_path, "Write clipped geometry");
  c_slice->add_option("--side", slice.side, "Geometry for --obj")->check(CLI::IsMember({"kept", "discarded", "caps"}));
  c_slice->add_option("--hatch-spacing", slice.spacing, "Hatch spacing (m)")->check(CLI::PositiveNumber);

  PickCmd pick;
  auto* c_pick = app.add_subcommand("pick", "Cast a ray and resolve the pick");
  pick.in.add_to(c_pick, true);
  pick.planes.add_to(c_pick);
  c_pick->add_option("--origin", pick.origin, "Ray origin x,y,z")->required();
  c_pick->add_option("--dir", pick.dir, "Unit ray direction x,y,z")->required();
  c_pick->add_option("--poche-plane", pick.poche_plane, "Active poche toggle, e.g. x-pos")
      ->check([](const std::string& s) { return parse_plane_name(s) ? "" : "unknown plane '" + s + "'"; });
  c_pick->add_option("--mode", pick.mode, "View mode for the highlight")
      ->check(CLI::IsMember({"inspect", "section", "reveal"}));

  AlignCmd align;
  auto* c_align = app.add_subcommand("align", "Alignment error from an annotation file");
  c_align->add_option("annotation", align.path, "Annotation JSON")->required()->check(CLI::ExistingFile);

  AnalyzeCmd analyze;
  auto* c_analyze = app.add_subcommand("analyze", "Score, time and timed-score tables with paired tests");
  c_analyze->add_option("study", analyze.path, "Study CSV")->required()->check(CLI::ExistingFile);

  TlxCmd tlx;
  auto* c_tlx = app.add_subcommand("tlx", "NASA TLX adjusted ratings and overall workload");
  c_tlx->add_option("responses", tlx.path, "TLX CSV")->required()->check(CLI::ExistingFile);

  ServeCmd serve;
  auto* c_serve = app.add_subcommand("serve", "Serve the HTTP API");
  serve.in.add_to(c_serve, true);
  c_serve->add_option("--host", serve.host, "Bind address");
  c_serve->add_option("--port", serve.port, "Port")->check(CLI::Range(1, 65535));
  c_serve->add_option("--serve-ui", serve.ui_dir, "Static viewer assets")->check(CLI::ExistingDirectory);

  for (auto* sub : app.get_subcommands({})) {
    sub->add_flag("--json", json, "Print reports as JSON");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (c_ingest->parsed()) {
      return ingest.run(json, out, err);
    }
    if (c_slice->parsed()) {
      return slice.run(json, out, err);
    }
    if (c_pick->parsed()) {
      return pick.run(json, out, err);
    }
    if (c_align->parsed()) {
      return align.run(json, out, err);
    }
    if (c_analyze->parsed()) {
      return analyze.run(json, out, err);
    }
    if (c_tlx->parsed()) {
      return tlx.run(json, out, err);
    }
    if (c_serve->parsed()) {
      return serve.run(out, err);
    }
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what();
    if (e.line() != 0) {
      err << " (line " << e.line() << ")";
    }
    err << "\n";
    return kExitData;
  }
  return kExitUsage;
}

} // namespace poche::cli
