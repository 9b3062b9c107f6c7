#pragma once

// Single-session HTTP JSON API under /api/v1/. Handlers are plain methods so
// they can be exercised in-process; `HttpServer` binds them to cpp-httplib.

#include "poche/metastore.hpp"
#include "poche/picking.hpp"
#include "poche/section.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>

namespace poche {

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// One immutable view of the session. Writers build a new one and swap it in.
struct Session {
  std::shared_ptr<const BuildingModel> model;
  std::uint64_t snapshot_id = 0;
  SectionBox box;
  ViewMode mode = ViewMode::Section;
  std::optional<HighlightSpec> highlight;
  std::optional<CameraPose> camera;
  std::shared_ptr<const SectionResult> result;
};

class Service {
public:
  /// `model` may be empty, in which case geometry endpoints answer 503.
  Service(std::optional<BuildingModel> model, MetadataStore store = {}, LayerTable layers = {});

  HttpResponse get_model() const;
  HttpResponse post_section(std::string_view body);
  HttpResponse post_pick(std::string_view body);
  HttpResponse get_metadata(std::string_view element_id) const;
  HttpResponse list_metadata() const;

  /// Routes `method path` to the handlers above; 404 for anything else.
  HttpResponse handle(std::string_view method, std::string_view path, std::string_view body);

  std::shared_ptr<const Session> session() const;
  const LayerTable& layers() const { return layers_; }
  std::shared_ptr<const MetadataStore> metadata() const { return store_.snapshot(); }

private:
  void install(std::shared_ptr<const Session> next);

  LayerTable layers_;
  SharedStore store_;
  // Serializes writers; readers only take `snapshot_mutex_` for the pointer copy.
  std::mutex writer_mutex_;
  mutable std::mutex snapshot_mutex_;
  std::shared_ptr<const Session> session_;
};

class HttpServer {
public:
  explicit HttpServer(Service& service, std::optional<std::filesystem::path> ui_dir = std::nullopt);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds `host:port` (port 0 picks a free one) and serves on a background
  /// thread. Returns the bound port; throws `IoError` when binding fails.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  /// Blocks serving on the calling thread. Throws `IoError` when binding fails.
  void run(const std::string& host, int port);
  void stop();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
};

inline constexpr int kDefaultPort = 7077;

} // namespace poche
