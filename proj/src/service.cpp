#include "poche/service.hpp"
#include "poche/wire.hpp"

#include <httplib.h>

namespace poche {

namespace {

HttpResponse json_response(int status, const nlohmann::json& j) { return {status, j.dump(), "application/json"}; }

HttpResponse error_response(int status, std::string_view message) {
  return json_response(status, {{"error", std::string(message)}});
}

HttpResponse no_model() { return error_response(503, "no model loaded"); }

std::optional<nlohmann::json> parse_body(std::string_view body) {
  try {
    return nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error&) {
    return std::nullopt;
  }
}

} // namespace

Service::Service(std::optional<BuildingModel> model, MetadataStore store, LayerTable layers)
    : layers_(std::move(layers)), store_(std::move(store)) {
  auto s = std::make_shared<Session>();
  if (model && !model->empty()) {
    for (const auto& e : model->elements()) {
      for (const auto& m : e.meshes) {
        layers_.try_emplace(layer_key(e.element_id, m.layer.layer_index, m.layered), m.layer);
      }
    }
    s->model = std::make_shared<const BuildingModel>(std::move(*model));
    s->snapshot_id = 1;
    s->box = SectionBox::around(aabb(*s->model));
    s->result = std::make_shared<const SectionResult>(clip_model(*s->model, s->box));
  }
  session_ = std::move(s);
}

std::shared_ptr<const Session> Service::session() const {
  std::lock_guard lock(snapshot_mutex_);
  return session_;
}

void Service::install(std::shared_ptr<const Session> next) {
  std::lock_guard lock(snapshot_mutex_);
  session_ = std::move(next);
}

HttpResponse Service::get_model() const {
  const auto s = session();
  if (!s->model) {
    return no_model();
  }
  auto j = wire::model_summary(*s->model, layers_);
  j["snapshot_id"] = s->snapshot_id;
  return json_response(200, j);
}

HttpResponse Service::post_section(std::string_view body) {
  const auto parsed = parse_body(body);
  if (!parsed) {
    return error_response(400, "body is not JSON");
  }
  std::lock_guard writer(writer_mutex_);
  const auto current = session();
  if (!current->model) {
    return no_model();
  }
  try {
    const auto req = wire::parse_section_request(*parsed);
    auto next = std::make_shared<Session>(*current);
    for (const auto& u : req.planes) {
      next->box = set_plane(next->box, u.axis, u.sign, u.offset, u.active);
    }
    if (req.mode) {
      next->mode = *req.mode;
    }
    if (req.camera) {
      next->camera = req.camera;
    }
    if (req.clear_highlight) {
      next->highlight.reset();
    } else if (req.highlight) {
      HighlightSpec h;
      h.element_id = req.highlight->element_id;
      h.layer_index = req.highlight->layer_index;
      next->highlight = h;
    }
    if (next->mode == ViewMode::Reveal && !next->camera) {
      return error_response(400, "reveal mode needs a camera");
    }
    if (next->box != current->box) {
      next->result = std::make_shared<const SectionResult>(clip_model(*next->model, next->box));
    }
    if (next->highlight) {
      next->highlight->style = next->mode == ViewMode::Inspect ? HighlightStyle::RedWire : HighlightStyle::RedSolid;
    }
    const RenderLayerSet set = classify_layers(*next->result, next->mode, next->highlight, next->camera);
    auto response = json_response(200, wire::section_response(next->box, next->mode, set));
    install(std::move(next));
    return response;
  } catch (const wire::RequestError& e) {
    return error_response(e.status, e.what());
  } catch (const Error& e) {
    return error_response(e.code() == ErrorCode::UnknownElement ? 422 : 400, e.what());
  }
}

HttpResponse Service::post_pick(std::string_view body) {
  const auto parsed = parse_body(body);
  if (!parsed) {
    return error_response(400, "body is not JSON");
  }
  // Picks read one snapshot and never wait on a running section update.
  const auto current = session();
  if (!current->model) {
    return no_model();
  }
  try {
    const auto req = wire::parse_pick_request(*parsed);
    std::optional<SectionPlane> toggle;
    if (req.toggle) {
      toggle = current->box.plane(req.toggle->first, req.toggle->second);
    }
    const PickResult pick = resolve_pick(cast_ray(*current->result, req.ray), toggle);
    std::optional<HighlightSpec> highlight;
    if (pick.hit) {
      highlight = highlight_for(pick, *current->model, current->box, current->mode);
    }
    auto response = json_response(200, wire::pick_response(pick, highlight, *store_.snapshot(), layers_));
    std::lock_guard writer(writer_mutex_);
    const auto latest = session();
    if (highlight || latest->highlight) {
      auto next = std::make_shared<Session>(*latest);
      next->highlight = highlight;
      install(std::move(next));
    }
    return response;
  } catch (const wire::RequestError& e) {
    return error_response(e.status, e.what());
  } catch (const Error& e) {
    return error_response(400, e.what());
  }
}

HttpResponse Service::get_metadata(std::string_view element_id) const {
  const auto record = store_.snapshot()->get(element_id);
  if (!record) {
    return error_response(404, "no metadata for '" + std::string(element_id) + "'");
  }
  return json_response(200, wire::record_json(*record));
}

HttpResponse Service::list_metadata() const {
  return json_response(200, {{"ids", store_.snapshot()->ids()}});
}

HttpResponse Service::handle(std::string_view method, std::string_view path, std::string_view body) {
  constexpr std::string_view prefix = "/api/v1/";
  if (!path.starts_with(prefix)) {
    return error_response(404, "not found");
  }
  const std::string_view route = path.substr(prefix.size());
  if (method == "GET" && route == "model") {
    return get_model();
  }
  if (method == "POST" && route == "section") {
    return post_section(body);
  }
  if (method == "POST" && route == "pick") {
    return post_pick(body);
  }
  if (method == "GET" && route == "metadata") {
    return list_metadata();
  }
  if (method == "GET" && route.starts_with("metadata/") && route.size() > 9) {
    return get_metadata(route.substr(9));
  }
  return error_response(404, "not found");
}

// --- HTTP binding ------------------------------------------------------------

struct HttpServer::Impl {
  httplib::Server server;
};

HttpServer::HttpServer(Service& service, std::optional<std::filesystem::path> ui_dir) : impl_(std::make_unique<Impl>()) {
  auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
    const HttpResponse r = service.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  impl_->server.Get(R"(/api/v1/.*)", forward);
  impl_->server.Post(R"(/api/v1/.*)", forward);
  if (ui_dir) {
    impl_->server.set_mount_point("/", ui_dir->string());
  }
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    throw Error(ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port));
  }
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpServer::run(const std::string& host, int port) {
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port));
  }
  impl_->server.listen_after_bind();
}

void HttpServer::stop() {
  impl_->server.stop();
  if (thread_.joinable()) {
    thread_.join();
  }
}

} // namespace poche
