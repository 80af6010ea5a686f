// src/mushra/server.cpp

// Copyright 2026 rirbench authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "httplib.h"

#include <spdlog/spdlog.h>

#include <thread>

#include "rirbench/errors.hpp"
#include "rirbench/mushra.hpp"

namespace rirbench::mushra {

namespace {

void send_json(httplib::Response &res, int status, const nlohmann::json &j) {
  res.status = status;
  res.set_content(j.dump(), "application/json");
}

template <class Fn>
void guarded(httplib::Response &res, Fn &&fn) {
  try {
    fn();
  } catch (const nlohmann::json::exception &e) {
    send_json(res, 400, {{"error", e.what()}, {"kind", "bad_json"}});
  } catch (const NotFoundError &e) {
    send_json(res, 404, {{"error", e.what()}, {"kind", e.kind()}});
  } catch (const ConflictError &e) {
    send_json(res, 409, {{"error", e.what()}, {"kind", e.kind()}});
  } catch (const ValidationError &e) {
    send_json(res, 422, {{"error", e.what()}, {"kind", e.kind()}, {"ids", e.ids()}});
  } catch (const Error &e) {
    send_json(res, e.is_validation() ? 422 : 500, {{"error", e.what()}, {"kind", e.kind()}});
  }
}

Aggregation parse_aggregation(const httplib::Request &req) {
  const auto a = req.has_param("aggregation") ? req.get_param_value("aggregation") : "pooled";
  if (a == "pooled") return Aggregation::kPooled;
  if (a == "per_listener") return Aggregation::kPerListener;
  throw ValidationError("aggregation must be 'pooled' or 'per_listener'");
}

}  // namespace

struct MushraServer::Impl {
  std::shared_ptr<MushraService> service;
  httplib::Server server;
  std::thread thread;
};

MushraServer::MushraServer(std::shared_ptr<MushraService> service,
                           std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>()) {
  impl_->service = std::move(service);
  auto &srv = impl_->server;
  auto *svc = impl_->service.get();
  srv.Post("/api/sessions", [svc](const httplib::Request &req, httplib::Response &res) {
    guarded(res, [&] { send_json(res, 201, svc->create_session(nlohmann::json::parse(req.body))); });
  });
  srv.Get(R"(/api/sessions/([^/]+)/listeners/([^/]+)/next)",
          [svc](const httplib::Request &req, httplib::Response &res) {
            guarded(res, [&] { send_json(res, 200, svc->next_trial(req.matches[1], req.matches[2])); });
          });
  srv.Get(R"(/api/stimuli/([^/]+))", [svc](const httplib::Request &req, httplib::Response &res) {
    guarded(res, [&] {
      res.set_content(svc->stimulus_wav(req.matches[1]), "audio/wav");
      res.status = 200;
    });
  });
  srv.Post("/api/ratings", [svc](const httplib::Request &req, httplib::Response &res) {
    guarded(res, [&] { send_json(res, 200, svc->submit_ratings(nlohmann::json::parse(req.body))); });
  });
  srv.Get(R"(/api/sessions/([^/]+)/report)", [svc](const httplib::Request &req, httplib::Response &res) {
    guarded(res, [&] { send_json(res, 200, svc->report(req.matches[1], parse_aggregation(req))); });
  });
  if (static_dir) {
    if (!srv.set_mount_point("/", static_dir->string()))
      throw IoError("static UI directory not found: " + static_dir->string());
  }
}

MushraServer::~MushraServer() { stop(); }

int MushraServer::start(const std::string &host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host)
                              : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void MushraServer::listen(const std::string &host, int port) {
  spdlog::info("listening-test service on {}:{}", host, port);
  if (!impl_->server.listen(host, port))
    throw IoError("cannot listen on " + host + ":" + std::to_string(port));
}

void MushraServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace rirbench::mushra
