#pragma once

// Geometry, metadata and layer-sidecar readers/writers.
//
// Geometry is an OBJ subset: `v x y z`, `f a b c ...` and `o <name>` where
// <name> is `<element_id>` or `<element_id>#<layer_index>`. Metadata is a
// long-format CSV (`element_id,category,family,parameter,value`) that
// converts to a JSON document keyed by element id.

#include "poche/model.hpp"
#include "poche/section.hpp"

#include <nlohmann/json.hpp>

#include <compare>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace poche {

/// Reads a whole file; throws `IoError` naming the path.
std::string read_file(const std::filesystem::path& path);
/// Writes a whole file; throws `IoError` naming the path.
void write_file(const std::filesystem::path& path, std::string_view bytes);

// --- geometry ----------------------------------------------------------------

struct ObjGroup {
  std::string name;
  TriMesh mesh;
};

/// Throws `ParseError` (with line), `DuplicateId`, or `LayerRefError` when
/// `layers` is given and a `#k` group has no entry in it.
BuildingModel parse_geometry(std::string_view text, const LayerTable* layers = nullptr);
BuildingModel load_geometry(const std::filesystem::path& path, const LayerTable* layers = nullptr);

/// OBJ text for the groups, in order. Coordinates use the shortest
/// round-tripping decimal form.
std::string write_obj(const std::vector<ObjGroup>& groups);
std::string write_obj(const BuildingModel& model);

/// Parses `{"id#k": {"material": ..., "hatch": ..., "thickness_m": ...}}`.
/// Throws `ParseError` for a malformed document, `LayerRefError` for an
/// unknown hatch name or a malformed key.
LayerTable parse_layer_sidecar(std::string_view text);
LayerTable load_layer_sidecar(const std::filesystem::path& path);

// --- CSV ---------------------------------------------------------------------

/// One RFC-4180 record and the 1-based line it starts on.
struct CsvRecord {
  std::vector<std::string> fields;
  std::size_t line = 0;
};

/// Splits text into records (CRLF or LF, optional UTF-8 BOM, blank lines
/// skipped). Throws `ParseError` for malformed quoting.
std::vector<CsvRecord> parse_csv(std::string_view text);

// --- metadata ----------------------------------------------------------------

struct MetadataRecordRow {
  std::string element_id;
  std::string category;
  std::string family;
  std::string parameter;
  std::string value;

  auto operator<=>(const MetadataRecordRow&) const = default;
};

inline constexpr std::string_view kMetadataHeader = "element_id,category,family,parameter,value";

/// RFC-4180 parsing. Throws `HeaderError` for a missing/wrong header and
/// `ParseError` (with 1-based line) for a wrong field count or empty key.
std::vector<MetadataRecordRow> parse_metadata_csv_text(std::string_view text);
std::vector<MetadataRecordRow> parse_metadata_csv(const std::filesystem::path& path);
std::string write_metadata_csv(const std::vector<MetadataRecordRow>& rows);

/// Object keyed by element id; each value holds category, family and a
/// parameters object. Throws `ConflictError` naming the id when rows for one
/// id disagree on category/family or give one parameter two values.
nlohmann::json csv_to_json(const std::vector<MetadataRecordRow>& rows);
/// Inverse of csv_to_json, rows ordered by (id, parameter). Throws `ParseError`.
std::vector<MetadataRecordRow> json_to_rows(const nlohmann::json& doc);
/// Two-space indented, keys in lexicographic order, trailing newline.
std::string dump_metadata_json(const nlohmann::json& doc);
/// Throws `ParseError` for text that is not JSON.
nlohmann::json parse_json_text(std::string_view text);

struct ValidationReport {
  std::vector<std::string> orphan_geometry_ids;
  std::vector<std::string> orphan_metadata_ids;
  std::vector<std::string> duplicate_rows;
  std::size_t element_count = 0;
  std::size_t row_count = 0;

  bool clean() const {
    return orphan_geometry_ids.empty() && orphan_metadata_ids.empty() && duplicate_rows.empty();
  }
};

ValidationReport validate_model(const BuildingModel& model, const std::vector<MetadataRecordRow>& rows);

} // namespace poche
