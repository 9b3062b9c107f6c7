#include "poche/metastore.hpp"

namespace poche {

std::optional<MetadataRecord> MetadataStore::get(std::string_view element_id) const {
  if (auto it = records_.find(element_id); it != records_.end()) {
    return it->second;
  }
  return std::nullopt;
}

std::vector<std::string> MetadataStore::ids() const {
  std::vector<std::string> out;
  out.reserve(records_.size());
  for (const auto& [id, _] : records_) {
    out.push_back(id);
  }
  return out;
}

MetadataStore put(MetadataStore store, MetadataRecord record) {
  if (record.element_id.empty()) {
    throw Error(ErrorCode::InvalidArgument, "metadata record needs an element id");
  }
  std::string key = record.element_id;
  store.records_.insert_or_assign(std::move(key), std::move(record));
  return store;
}

MetadataStore store_from_rows(const std::vector<MetadataRecordRow>& rows) {
  return store_from_json(csv_to_json(rows));
}

nlohmann::json to_json(const MetadataRecord& record) {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : record.parameters) {
    params[k] = v;
  }
  return {{"category", record.category}, {"family", record.family}, {"parameters", std::move(params)}};
}

nlohmann::json to_json(const MetadataStore& store) {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& [id, rec] : store.all()) {
    doc[id] = to_json(rec);
  }
  return doc;
}

MetadataStore store_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) {
    throw Error(ErrorCode::ParseError, "metadata document must be an object");
  }
  MetadataStore store;
  for (const auto& [id, rec] : doc.items()) {
    const bool shaped = !id.empty() && rec.is_object() && rec.contains("category") && rec["category"].is_string() &&
                        rec.contains("family") && rec["family"].is_string() && rec.contains("parameters") &&
                        rec["parameters"].is_object();
    if (!shaped) {
      throw Error(ErrorCode::ParseError, "malformed metadata record '" + id + "'");
    }
    MetadataRecord r{id, rec["category"].get<std::string>(), rec["family"].get<std::string>(), {}};
    for (const auto& [param, value] : rec["parameters"].items()) {
      if (!value.is_string()) {
        throw Error(ErrorCode::ParseError, "parameter '" + param + "' of '" + id + "' must be a string");
      }
      r.parameters[param] = value.get<std::string>();
    }
    store = put(std::move(store), std::move(r));
  }
  return store;
}

void persist(const MetadataStore& store, const std::filesystem::path& path) {
  write_file(path, dump_metadata_json(to_json(store)));
}

MetadataStore load_store(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return store_from_json(parse_json_text(text));
  } catch (const Error& e) {
    std::string detail = e.what();
    detail.erase(0, detail.find(": ") + 2);
    throw Error(e.code(), path.string() + ": " + detail, e.line());
  }
}

SharedStore::SharedStore(MetadataStore initial)
    : current_(std::make_shared<const MetadataStore>(std::move(initial))) {}

std::shared_ptr<const MetadataStore> SharedStore::snapshot() const {
  std::lock_guard lock(mutex_);
  return current_;
}

void SharedStore::put(MetadataRecord record) {
  std::lock_guard lock(mutex_);
  current_ = std::make_shared<const MetadataStore>(poche::put(*current_, std::move(record)));
}

void SharedStore::replace(MetadataStore store) {
  auto next = std::make_shared<const MetadataStore>(std::move(store));
  std::lock_guard lock(mutex_);
  current_ = std::move(next);
}

} // namespace poche
