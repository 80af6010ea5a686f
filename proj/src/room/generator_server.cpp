// src/room/generator_server.cpp

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

#include "rirbench/generator.hpp"
#include "rirbench/wav.hpp"

namespace rirbench::room {

struct GeneratorServer::Impl {
  std::shared_ptr<GeneratorEndpoint> generator;
  httplib::Server server;
  std::mutex serial;  // taken when the generator declares a serial contract
  std::thread thread;
};

GeneratorServer::GeneratorServer(std::shared_ptr<GeneratorEndpoint> generator)
    : impl_(std::make_unique<Impl>()) {
  impl_->generator = std::move(generator);
  impl_->server.Post("/generate", [this](const httplib::Request &req, httplib::Response &res) {
    try {
      const auto body = nlohmann::json::parse(req.body);
      GenerateRequest r;
      r.prompt = body.at("prompt").get<std::string>();
      r.sample_rate = body.value("sample_rate", 16000);
      if (body.contains("seed") && !body["seed"].is_null())
        r.seed = body["seed"].get<std::uint64_t>();
      GeneratedRir out;
      if (impl_->generator->concurrent_safe()) {
        out = impl_->generator->generate(r);
      } else {
        std::lock_guard<std::mutex> lock(impl_->serial);
        out = impl_->generator->generate(r);
      }
      const auto wav = audio::encode_wav(audio::AudioBuffer(out.rir), audio::WavFormat::kFloat32);
      res.set_header(kMetadataHeader, out.metadata.dump());
      res.set_content(std::string(wav.begin(), wav.end()), "audio/wav");
    } catch (const nlohmann::json::exception &e) {
      res.status = 400;
      res.set_content(nlohmann::json{{"error", e.what()}}.dump(), "application/json");
    } catch (const Error &e) {
      res.status = e.is_validation() ? 422 : 500;
      res.set_content(nlohmann::json{{"error", e.what()}, {"kind", e.kind()}}.dump(),
                      "application/json");
    }
  });
}

GeneratorServer::~GeneratorServer() { stop(); }

int GeneratorServer::start(const std::string &host, int port) {
  int bound = port == 0 ? impl_->server.bind_to_any_port(host)
                        : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void GeneratorServer::listen(const std::string &host, int port) {
  spdlog::info("generator '{}' listening on {}:{}", impl_->generator->name(), host, port);
  if (!impl_->server.listen(host, port))
    throw IoError("cannot listen on " + host + ":" + std::to_string(port));
}

void GeneratorServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace rirbench::room
