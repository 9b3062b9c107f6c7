#include "poche/ingest.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace poche {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for reading");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) {
    throw Error(ErrorCode::IoError, "failed reading '" + path.string() + "'");
  }
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
  }
}

// --- geometry ----------------------------------------------------------------

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) {
      ++i;
    }
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') {
      ++j;
    }
    if (j > i) {
      out.push_back(line.substr(i, j - i));
    }
    i = j;
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, out);
  return res.ec == std::errc() && res.ptr == end && std::isfinite(out);
}

bool parse_int(std::string_view s, long& out) {
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, out);
  return res.ec == std::errc() && res.ptr == end;
}

struct GroupName {
  std::string id;
  std::optional<int> layer;
};

std::optional<GroupName> parse_group_name(std::string_view name) {
  const auto hash = name.find('#');
  GroupName g;
  g.id = std::string(name.substr(0, hash));
  if (g.id.empty()) {
    return std::nullopt;
  }
  if (hash != std::string_view::npos) {
    const auto digits = name.substr(hash + 1);
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string_view::npos || digits.size() > 9) {
      return std::nullopt;
    }
    long k = 0;
    parse_int(digits, k);
    g.layer = static_cast<int>(k);
  }
  return g;
}

struct RawGroup {
  GroupName name;
  std::size_t line = 0;
  std::vector<std::array<long, 3>> faces;  // global 0-based vertex indices
  std::vector<std::size_t> face_lines;
};

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

} // namespace

BuildingModel parse_geometry(std::string_view text, const LayerTable* layers) {
  std::vector<Vector3> vertices;
  std::vector<RawGroup> groups;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }
    const auto tok = split_ws(line);
    if (tok.empty() || tok[0].front() == '#') {
      continue;
    }
    const auto kind = tok[0];
    if (kind == "v") {
      Vector3 p;
      if (tok.size() < 4 || tok.size() > 5 || !parse_double(tok[1], p.x()) || !parse_double(tok[2], p.y()) ||
          !parse_double(tok[3], p.z())) {
        throw Error(ErrorCode::ParseError, "malformed vertex", line_no);
      }
      vertices.push_back(p);
    } else if (kind == "o") {
      if (tok.size() != 2) {
        throw Error(ErrorCode::ParseError, "object line needs exactly one name", line_no);
      }
      auto name = parse_group_name(tok[1]);
      if (!name) {
        throw Error(ErrorCode::ParseError, "bad group name '" + std::string(tok[1]) + "'", line_no);
      }
      groups.push_back(RawGroup{*name, line_no, {}, {}});
    } else if (kind == "f") {
      if (groups.empty()) {
        throw Error(ErrorCode::ParseError, "face before any object group", line_no);
      }
      if (tok.size() < 4) {
        throw Error(ErrorCode::ParseError, "face needs at least three vertices", line_no);
      }
      std::vector<long> idx;
      for (std::size_t i = 1; i < tok.size(); ++i) {
        const auto slash = tok[i].find('/');
        long v = 0;
        if (!parse_int(tok[i].substr(0, slash), v) || v == 0) {
          throw Error(ErrorCode::ParseError, "malformed face index", line_no);
        }
        const long n = static_cast<long>(vertices.size());
        v = v > 0 ? v - 1 : n + v;
        if (v < 0 || v >= n) {
          throw Error(ErrorCode::ParseError, "face index out of range", line_no);
        }
        idx.push_back(v);
      }
      for (std::size_t k = 1; k + 1 < idx.size(); ++k) {
        groups.back().faces.push_back({idx[0], idx[k], idx[k + 1]});
        groups.back().face_lines.push_back(line_no);
      }
    } else if (kind == "vn" || kind == "vt" || kind == "s" || kind == "usemtl" || kind == "mtllib") {
      continue;
    } else {
      throw Error(ErrorCode::ParseError, "unsupported record '" + std::string(kind) + "'", line_no);
    }
  }

  std::vector<Element> elements;
  std::map<std::string, std::size_t> by_id;
  std::map<std::string, std::set<int>> layers_seen;
  std::map<std::string, bool> plain_seen;
  for (const auto& g : groups) {
    if (g.faces.empty()) {
      throw Error(ErrorCode::ParseError, "group has no faces", g.line);
    }
    const std::string& id = g.name.id;
    const bool layered = g.name.layer.has_value();
    const int layer_index = g.name.layer.value_or(0);
    if (plain_seen.contains(id) && (plain_seen[id] || !layered)) {
      throw Error(ErrorCode::DuplicateId, "element '" + id + "' defined twice", g.line);
    }
    if (layered && !layers_seen[id].insert(layer_index).second) {
      throw Error(ErrorCode::DuplicateId, "group '" + id + "#" + std::to_string(layer_index) + "' defined twice",
                  g.line);
    }
    plain_seen[id] = plain_seen[id] || !layered;

    ElementMesh em;
    em.layered = layered;
    em.layer.layer_index = layer_index;
    const std::string key = layer_key(id, layer_index, layered);
    if (layers != nullptr) {
      if (auto it = layers->find(key); it != layers->end()) {
        em.layer = it->second;
        em.layer.layer_index = layer_index;
      } else if (layered) {
        throw Error(ErrorCode::LayerRefError, "no layer spec for group '" + key + "'", g.line);
      }
    }
    // Referenced vertices keep their file order; indices become group-local.
    std::map<long, int> local;
    for (const auto& face : g.faces) {
      for (long v : face) {
        local.emplace(v, 0);
      }
    }
    for (auto& [file_index, index] : local) {
      index = static_cast<int>(em.mesh.vertices.size());
      em.mesh.vertices.push_back(vertices[file_index]);
    }
    for (std::size_t f = 0; f < g.faces.size(); ++f) {
      const Tri t(local[g.faces[f][0]], local[g.faces[f][1]], local[g.faces[f][2]]);
      em.mesh.triangles.push_back(t);
      if (em.mesh.area(em.mesh.triangles.size() - 1) <= kMinTriangleArea) {
        throw Error(ErrorCode::ParseError, "degenerate triangle", g.face_lines[f]);
      }
    }
    auto [it, inserted] = by_id.try_emplace(id, elements.size());
    if (inserted) {
      Element e;
      e.element_id = id;
      elements.push_back(std::move(e));
    }
    elements[it->second].meshes.push_back(std::move(em));
  }
  return BuildingModel(std::move(elements));
}

BuildingModel load_geometry(const std::filesystem::path& path, const LayerTable* layers) {
  return parse_geometry(read_file(path), layers);
}

std::string write_obj(const std::vector<ObjGroup>& groups) {
  std::string out;
  long base = 1;
  for (const auto& g : groups) {
    out += "o " + g.name + "\n";
    for (const auto& v : g.mesh.vertices) {
      out += "v " + format_double(v.x()) + " " + format_double(v.y()) + " " + format_double(v.z()) + "\n";
    }
    for (const auto& t : g.mesh.triangles) {
      out += "f " + std::to_string(base + t[0]) + " " + std::to_string(base + t[1]) + " " +
             std::to_string(base + t[2]) + "\n";
    }
    base += static_cast<long>(g.mesh.vertices.size());
  }
  return out;
}

std::string write_obj(const BuildingModel& model) {
  std::vector<ObjGroup> groups;
  for (const auto& e : model.elements()) {
    for (const auto& m : e.meshes) {
      groups.push_back({layer_key(e.element_id, m.layer.layer_index, m.layered), m.mesh});
    }
  }
  return write_obj(groups);
}

// --- layer sidecar -----------------------------------------------------------

nlohmann::json parse_json_text(std::string_view text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

LayerTable parse_layer_sidecar(std::string_view text) {
  const auto doc = parse_json_text(text);
  if (!doc.is_object()) {
    throw Error(ErrorCode::ParseError, "layer sidecar must be a JSON object");
  }
  LayerTable table;
  for (const auto& [key, value] : doc.items()) {
    const auto name = parse_group_name(key);
    if (!name) {
      throw Error(ErrorCode::LayerRefError, "malformed layer key '" + key + "'");
    }
    if (!value.is_object() || !value.contains("material") || !value["material"].is_string() ||
        !value.contains("hatch") || !value["hatch"].is_string()) {
      throw Error(ErrorCode::ParseError, "layer '" + key + "' needs string material and hatch");
    }
    LayerSpec spec;
    spec.layer_index = name->layer.value_or(0);
    spec.material_name = value["material"].get<std::string>();
    spec.hatch = parse_hatch(value["hatch"].get<std::string>());
    if (value.contains("thickness_m")) {
      if (!value["thickness_m"].is_number()) {
        throw Error(ErrorCode::ParseError, "layer '" + key + "' thickness_m must be a number");
      }
      spec.thickness = value["thickness_m"].get<double>();
    }
    table[key] = spec;
  }
  return table;
}

LayerTable load_layer_sidecar(const std::filesystem::path& path) {
  return parse_layer_sidecar(read_file(path));
}

// --- metadata CSV ------------------------------------------------------------

std::vector<CsvRecord> parse_csv(std::string_view text) {
  std::vector<CsvRecord> records;
  if (text.starts_with("\xEF\xBB\xBF")) {
    text.remove_prefix(3);
  }
  std::size_t line = 1;
  std::size_t i = 0;
  while (i < text.size()) {
    CsvRecord rec;
    rec.line = line;
    std::string field;
    bool done = false;
    while (!done) {
      if (i < text.size() && text[i] == '"') {
        ++i;
        while (true) {
          if (i >= text.size()) {
            throw Error(ErrorCode::ParseError, "unterminated quoted field", rec.line);
          }
          if (text[i] == '"') {
            if (i + 1 < text.size() && text[i + 1] == '"') {
              field += '"';
              i += 2;
              continue;
            }
            ++i;
            break;
          }
          if (text[i] == '\n') {
            ++line;
          }
          field += text[i++];
        }
        if (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
          throw Error(ErrorCode::ParseError, "characters after closing quote", line);
        }
      } else {
        while (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
          if (text[i] == '"') {
            throw Error(ErrorCode::ParseError, "quote inside unquoted field", line);
          }
          field += text[i++];
        }
      }
      rec.fields.push_back(std::move(field));
      field.clear();
      if (i >= text.size()) {
        done = true;
      } else if (text[i] == ',') {
        ++i;
      } else {
        if (text[i] == '\r') {
          ++i;
        }
        if (i < text.size() && text[i] == '\n') {
          ++i;
        }
        ++line;
        done = true;
      }
    }
    if (!(rec.fields.size() == 1 && rec.fields[0].empty())) {
      records.push_back(std::move(rec));
    }
  }
  return records;
}

namespace {

std::string quote_csv(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) {
    return field;
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') {
      out += '"';
    }
    out += c;
  }
  return out + "\"";
}

} // namespace

std::vector<MetadataRecordRow> parse_metadata_csv_text(std::string_view text) {
  const auto records = parse_csv(text);
  if (records.empty()) {
    throw Error(ErrorCode::HeaderError, "missing header");
  }
  const auto& header = records.front().fields;
  const std::vector<std::string> expected{"element_id", "category", "family", "parameter", "value"};
  if (header != expected) {
    throw Error(ErrorCode::HeaderError, "header must be exactly '" + std::string(kMetadataHeader) + "'", 1);
  }
  std::vector<MetadataRecordRow> rows;
  rows.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& f = records[r].fields;
    if (f.size() != 5) {
      throw Error(ErrorCode::ParseError, "expected 5 fields, got " + std::to_string(f.size()), records[r].line);
    }
    if (f[0].empty() || f[3].empty()) {
      throw Error(ErrorCode::ParseError, "element_id and parameter must be nonempty", records[r].line);
    }
    rows.push_back({f[0], f[1], f[2], f[3], f[4]});
  }
  return rows;
}

std::vector<MetadataRecordRow> parse_metadata_csv(const std::filesystem::path& path) {
  return parse_metadata_csv_text(read_file(path));
}

std::string write_metadata_csv(const std::vector<MetadataRecordRow>& rows) {
  std::string out(kMetadataHeader);
  out += "\n";
  for (const auto& r : rows) {
    out += quote_csv(r.element_id) + "," + quote_csv(r.category) + "," + quote_csv(r.family) + "," +
           quote_csv(r.parameter) + "," + quote_csv(r.value) + "\n";
  }
  return out;
}

// --- metadata JSON -----------------------------------------------------------

nlohmann::json csv_to_json(const std::vector<MetadataRecordRow>& rows) {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& r : rows) {
    if (!doc.contains(r.element_id)) {
      doc[r.element_id] = {{"category", r.category}, {"family", r.family}, {"parameters", nlohmann::json::object()}};
    }
    auto& rec = doc[r.element_id];
    if (rec["category"] != r.category || rec["family"] != r.family) {
      throw Error(ErrorCode::ConflictError, "element '" + r.element_id + "' has conflicting category/family");
    }
    auto& params = rec["parameters"];
    if (params.contains(r.parameter) && params[r.parameter] != r.value) {
      throw Error(ErrorCode::ConflictError,
                  "element '" + r.element_id + "' gives parameter '" + r.parameter + "' two values");
    }
    params[r.parameter] = r.value;
  }
  return doc;
}

std::vector<MetadataRecordRow> json_to_rows(const nlohmann::json& doc) {
  if (!doc.is_object()) {
    throw Error(ErrorCode::ParseError, "metadata document must be an object");
  }
  std::vector<MetadataRecordRow> rows;
  for (const auto& [id, rec] : doc.items()) {
    if (id.empty() || !rec.is_object() || !rec.contains("category") || !rec["category"].is_string() ||
        !rec.contains("family") || !rec["family"].is_string() || !rec.contains("parameters") ||
        !rec["parameters"].is_object()) {
      throw Error(ErrorCode::ParseError, "malformed metadata record '" + id + "'");
    }
    for (const auto& [param, value] : rec["parameters"].items()) {
      if (!value.is_string()) {
        throw Error(ErrorCode::ParseError, "parameter '" + param + "' of '" + id + "' must be a string");
      }
      rows.push_back({id, rec["category"].get<std::string>(), rec["family"].get<std::string>(), param,
                      value.get<std::string>()});
    }
  }
  return rows;
}

std::string dump_metadata_json(const nlohmann::json& doc) {
  try {
    return doc.dump(2) + "\n";
  } catch (const nlohmann::json::type_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

ValidationReport validate_model(const BuildingModel& model, const std::vector<MetadataRecordRow>& rows) {
  ValidationReport report;
  report.element_count = model.elements().size();
  report.row_count = rows.size();
  std::set<std::string> geometry;
  for (const auto& e : model.elements()) {
    geometry.insert(e.element_id);
  }
  std::set<std::string> metadata;
  std::map<std::pair<std::string, std::string>, int> pairs;
  for (const auto& r : rows) {
    metadata.insert(r.element_id);
    if (++pairs[{r.element_id, r.parameter}] == 2) {
      report.duplicate_rows.push_back(r.element_id + "/" + r.parameter);
    }
  }
  std::set_difference(geometry.begin(), geometry.end(), metadata.begin(), metadata.end(),
                      std::back_inserter(report.orphan_geometry_ids));
  std::set_difference(metadata.begin(), metadata.end(), geometry.begin(), geometry.end(),
                      std::back_inserter(report.orphan_metadata_ids));
  std::sort(report.duplicate_rows.begin(), report.duplicate_rows.end());
  return report;
}

} // namespace poche
