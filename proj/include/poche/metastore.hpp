#pragma once

// Keyed metadata store, persisted as the metadata JSON document.

#include "poche/ingest.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace poche {

struct MetadataRecord {
  std::string element_id;
  std::string category;
  std::string family;
  std::map<std::string, std::string> parameters;

  bool operator==(const MetadataRecord&) const = default;
};

/// Immutable-by-convention map from element id to record. Updates go through
/// `put`, which takes the store by value so `s = put(std::move(s), r)` is cheap.
class MetadataStore {
public:
  std::optional<MetadataRecord> get(std::string_view element_id) const;
  const std::map<std::string, MetadataRecord, std::less<>>& all() const { return records_; }
  std::vector<std::string> ids() const;
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  bool operator==(const MetadataStore&) const = default;

private:
  friend MetadataStore put(MetadataStore store, MetadataRecord record);
  std::map<std::string, MetadataRecord, std::less<>> records_;
};

/// Last writer wins. Throws `InvalidArgument` for an empty element id.
[[nodiscard]] MetadataStore put(MetadataStore store, MetadataRecord record);

/// Groups rows per element (see csv_to_json for the conflict rules).
MetadataStore store_from_rows(const std::vector<MetadataRecordRow>& rows);
nlohmann::json to_json(const MetadataStore& store);
nlohmann::json to_json(const MetadataRecord& record);
/// Throws `ParseError` for a document that is not the metadata JSON shape.
MetadataStore store_from_json(const nlohmann::json& doc);

/// Throws `IoError` with the path on write failure.
void persist(const MetadataStore& store, const std::filesystem::path& path);
/// Throws `IoError` for unreadable files and `ParseError` for malformed ones.
MetadataStore load_store(const std::filesystem::path& path);

/// Snapshot holder for concurrent readers: `snapshot()` returns the current
/// immutable store, writers install a whole new store under the lock.
class SharedStore {
public:
  explicit SharedStore(MetadataStore initial = {});

  std::shared_ptr<const MetadataStore> snapshot() const;
  void put(MetadataRecord record);
  void replace(MetadataStore store);

private:
  mutable std::mutex mutex_;
  std::shared_ptr<const MetadataStore> current_;
};

} // namespace poche
