// Copyright 2026 The sdxkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sdx/listen_http.hpp"

#include <httplib.h>

#include "sdx/error.hpp"

namespace sdx {

int http_status(Errc code) {
  switch (code) {
    case Errc::kUnknownSession:
    case Errc::kUnknownComparison:
    case Errc::kMissingFile:
      return 404;
    case Errc::kDuplicateSubmission:
      return 409;
    case Errc::kPlanExhausted:
      return 410;
    case Errc::kInvalidAudio:
    case Errc::kIoError:
      return 500;
    default:
      return 400;
  }
}

namespace {

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  send_json(res, status, {{"error", code}, {"message", message}});
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    send_error(res, http_status(e.code()), std::string(to_string(e.code())), e.what());
  } catch (const nlohmann::json::exception& e) {
    send_error(res, 400, "SchemaError", e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, "Internal", e.what());
  }
}

nlohmann::json parse_body(const httplib::Request& req) {
  auto doc = nlohmann::json::parse(req.body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) fail(Errc::kSchemaError, "request body must be a JSON object");
  return doc;
}

nlohmann::json session_view(const Session& s) {
  return {{"session_id", s.id},
          {"assessor", s.assessor},
          {"category", std::string(to_string(s.category))},
          {"completed", s.cursor},
          {"total", s.plan.comparisons.size()}};
}

}  // namespace

struct ListenServer::Impl {
  ListeningTest& service;
  httplib::Server server;

  explicit Impl(ListeningTest& s) : service(s) {}
};

ListenServer::ListenServer(ListeningTest& service, std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>(service)) {
  auto& srv = impl_->server;
  ListeningTest& svc = impl_->service;

  srv.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  srv.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });

  srv.Post("/sessions", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = parse_body(req);
      const auto assessor = body.at("assessor").get<std::string>();
      const auto category = parse_assessor_category(body.at("category").get<std::string>());
      const auto equipment = body.value("equipment", std::string());
      send_json(res, 201, session_view(svc.create_session(assessor, category, equipment)));
    });
  });

  srv.Get(R"(/sessions/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, session_view(svc.session(req.matches[1]))); });
  });

  srv.Get(R"(/sessions/([^/]+)/next)", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, to_json(svc.next_comparison(req.matches[1]))); });
  });

  srv.Get(R"(/audio/([A-Za-z0-9]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string id = req.matches[1];
      if (!svc.store().has_clip(id)) fail(Errc::kMissingFile, "unknown clip '" + id + "'");
      res.set_content(svc.audio_bytes(id), "audio/wav");
    });
  });

  srv.Post("/results", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = parse_body(req);
      Submission sub;
      sub.comparison_id = body.at("comparison_id").get<std::string>();
      sub.choice = parse_choice(body.at("choice").get<std::string>());
      sub.elapsed_seconds = body.at("elapsed_seconds").get<double>();
      sub.switch_count = body.at("switch_count").get<int>();
      const ComparisonRecord r = svc.submit_result(sub);
      const auto colon = sub.comparison_id.rfind(':');
      const Session s = svc.session(sub.comparison_id.substr(0, colon));
      // Blind: the response confirms the choice but names no models.
      send_json(res, 200, {{"comparison_id", sub.comparison_id},
                           {"choice", std::string(to_string(r.choice))},
                           {"completed", s.cursor},
                           {"total", s.plan.comparisons.size()}});
    });
  });

  srv.Get("/standings", [&svc](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, svc.standings()); });
  });

  srv.Get("/stats", [&svc](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, svc.stats()); });
  });

  if (static_dir && !srv.set_mount_point("/", static_dir->string())) {
    fail(Errc::kMissingFile, "static directory " + static_dir->string() + " does not exist");
  }
}

ListenServer::~ListenServer() { stop(); }

int ListenServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) fail(Errc::kIoError, "cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) fail(Errc::kIoError, "cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void ListenServer::listen() { impl_->server.listen_after_bind(); }

void ListenServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace sdx
