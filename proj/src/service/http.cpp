#include "gsm/service/http.hpp"

#include <atomic>

#define CPPHTTPLIB_THREAD_POOL_COUNT 16
#include <httplib.h>

namespace gsm::service {

namespace {

constexpr const char* kJson = "application/json";

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  res.status = status;
  res.set_content(json{{"error", {{"code", code}, {"message", message}}}}.dump(), kJson);
}

json body_of(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw ServiceError(400, "bad_json", e.what());
  }
}

std::string sse_frame(const json& record) {
  return "id: " + std::to_string(record.at("seq").get<std::size_t>()) + "\nevent: " + record.at("kind").get<std::string>() +
         "\ndata: " + record.dump() + "\n\n";
}

}  // namespace

struct HttpService::Impl {
  SessionManager& sessions;
  httplib::Server server;
  std::atomic<bool> stopping{false};

  explicit Impl(SessionManager& s) : sessions(s) { routes(); }

  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  Handler guarded(Handler h) {
    return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
      try {
        h(req, res);
      } catch (const ServiceError& e) {
        send_error(res, e.status, e.code, e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, "internal", e.what());
      }
    };
  }

  std::shared_ptr<Session> session(const httplib::Request& req) { return sessions.find(req.path_params.at("id")); }

  void routes() {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type, Last-Event-ID"},
                                {"Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS"}});
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server.Get("/pack", guarded([this](const auto&, auto& res) { res.set_content(sessions.describe().dump(), kJson); }));
    server.Get("/sessions", guarded([this](const auto&, auto& res) { res.set_content(sessions.list().dump(), kJson); }));
    server.Post("/sessions", guarded([this](const auto& req, auto& res) {
      auto s = sessions.create(body_of(req));
      res.status = 201;
      res.set_content(s->info().dump(), kJson);
    }));
    server.Put("/sessions/:id/params", guarded([this](const auto& req, auto& res) {
      auto s = session(req);
      const json body = body_of(req);
      if (!body.contains("params") || !body.at("params").is_object()) {
        throw ServiceError(400, "bad_request", "expected {\"params\": {...}}");
      }
      Valuation overrides;
      for (const auto& [k, v] : body.at("params").items()) {
        try {
          overrides[k] = value_from_json(v);
        } catch (const std::invalid_argument& e) {
          throw ServiceError(400, "bad_value", e.what());
        }
      }
      s->set_params(overrides);
      res.set_content(s->info().dump(), kJson);
    }));
    server.Post("/sessions/:id/start",
                guarded([this](const auto& req, auto& res) { res.set_content(session(req)->start().dump(), kJson); }));
    server.Post("/sessions/:id/measurements", guarded([this](const auto& req, auto& res) {
      res.set_content(session(req)->measurements(body_of(req)).dump(), kJson);
    }));
    server.Post("/sessions/:id/physician", guarded([this](const auto& req, auto& res) {
      res.set_content(session(req)->physician(body_of(req)).dump(), kJson);
    }));
    server.Post("/sessions/:id/tick", guarded([this](const auto& req, auto& res) {
      res.set_content(session(req)->tick(body_of(req)).dump(), kJson);
    }));
    server.Get("/sessions/:id/state",
               guarded([this](const auto& req, auto& res) { res.set_content(session(req)->state().dump(), kJson); }));
    server.Get("/sessions/:id/guidelines",
               guarded([this](const auto& req, auto& res) { res.set_content(session(req)->guidelines().dump(), kJson); }));
    server.Get("/sessions/:id/log", guarded([this](const auto& req, auto& res) {
      auto s = session(req);
      if (req.get_param_value("format") == "jsonl") {
        res.set_content(s->log_text(), "application/x-ndjson");
      } else {
        res.set_content(json{{"deviations", s->deviations()}}.dump(), kJson);
      }
    }));
    server.Get("/sessions/:id/events", guarded([this](const auto& req, auto& res) { stream(req, res); }));
  }

  void stream(const httplib::Request& req, httplib::Response& res) {
    auto s = session(req);
    std::size_t from = 0;
    try {
      if (req.has_header("Last-Event-ID")) from = std::stoull(req.get_header_value("Last-Event-ID")) + 1;
      else if (req.has_param("from")) from = std::stoull(req.get_param_value("from"));
    } catch (const std::exception&) {
      throw ServiceError(400, "bad_request", "bad resume position");
    }
    auto next = std::make_shared<std::size_t>(from);
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider("text/event-stream", [this, s, next](std::size_t, httplib::DataSink& sink) {
      if (stopping) return false;
      const auto records = s->records_from(*next, std::chrono::milliseconds(500));
      std::string out;
      for (const json& r : records) out += sse_frame(r);
      *next += records.size();
      if (out.empty()) {
        if (s->closed()) {
          sink.done();
          return true;
        }
        out = ": keep-alive\n\n";
      }
      return sink.write(out.data(), out.size());
    });
  }
};

HttpService::HttpService(SessionManager& sessions) : impl_(std::make_unique<Impl>(sessions)) {}

HttpService::~HttpService() { stop(); }

int HttpService::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpService::listen() { return impl_->server.listen_after_bind(); }

void HttpService::stop() {
  impl_->stopping = true;
  impl_->server.stop();
}

}  // namespace gsm::service
