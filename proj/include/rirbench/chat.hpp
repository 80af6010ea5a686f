// include/rirbench/chat.hpp

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

#ifndef RIRBENCH_CHAT_HPP_
#define RIRBENCH_CHAT_HPP_

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rirbench/endpoint.hpp"

namespace rirbench::labeling {

struct ChatMessage {
  std::string role = "user";
  std::string text;
  /// Path of an image attached to this message; sent base64-encoded.
  std::optional<std::string> image_ref;
};

struct ChatRequest {
  std::string system;
  std::vector<ChatMessage> messages;

  /// Canonical serialization of the user-side content (cache key input).
  std::string user_content() const;
};

/// A chat-completion model: a VLM captioner, the judge, or the fuser.
class ChatEndpoint {
 public:
  virtual ~ChatEndpoint() = default;
  virtual std::string complete(const ChatRequest &request) = 0;
  virtual std::string name() const = 0;
};

/// Mock driven by a script (JSON):
///   {"name": "...",
///    "rules": [{"contains": "...", "reply": "...", "error": "...", "fail_times": n}],
///    "sequence": ["...", ...], "default": "...", "echo_prefix": "..."}
/// Rules match on a substring of system + user text and are tried in order;
/// a rule with "error" and no "fail_times" always fails, with "fail_times"
/// it fails that many times then replies. "{{user}}" in a reply expands to
/// the user text. Then "sequence" replies are consumed in order, then
/// "echo_prefix" echoes the user text, then "default".
class ScriptedChatEndpoint : public ChatEndpoint {
 public:
  explicit ScriptedChatEndpoint(nlohmann::json script, std::string name_override = "");
  static std::shared_ptr<ScriptedChatEndpoint> from_file(const std::filesystem::path &path,
                                                         std::string name_override = "");

  std::string complete(const ChatRequest &request) override;
  std::string name() const override { return name_; }
  std::size_t calls() const { return calls_.load(); }

 private:
  nlohmann::json script_;
  std::string name_;
  std::mutex mutex_;
  std::vector<int> rule_hits_;
  std::size_t sequence_pos_ = 0;
  std::atomic<std::size_t> calls_{0};
};

/// POST {system, messages: [{role, text, image_b64?}]} -> {text}.
class HttpChatEndpoint : public ChatEndpoint {
 public:
  HttpChatEndpoint(std::string name, std::string url, std::string api_key = "",
                   double timeout_seconds = 300.0);
  std::string complete(const ChatRequest &request) override;
  std::string name() const override { return name_; }

 private:
  std::string name_, url_, api_key_;
  double timeout_;
};

class RetryingChatEndpoint : public ChatEndpoint {
 public:
  RetryingChatEndpoint(std::shared_ptr<ChatEndpoint> inner, RetryPolicy policy)
      : inner_(std::move(inner)), policy_(policy) {}
  std::string complete(const ChatRequest &request) override;
  std::string name() const override { return inner_->name(); }

 private:
  std::shared_ptr<ChatEndpoint> inner_;
  RetryPolicy policy_;
};

/// Serves repeated exchanges from a ResponseCache keyed by
/// (endpoint name, system hash, user content hash).
class CachedChatEndpoint : public ChatEndpoint {
 public:
  CachedChatEndpoint(std::shared_ptr<ChatEndpoint> inner, std::shared_ptr<ResponseCache> cache)
      : inner_(std::move(inner)), cache_(std::move(cache)) {}
  std::string complete(const ChatRequest &request) override;
  std::string name() const override { return inner_->name(); }

 private:
  std::shared_ptr<ChatEndpoint> inner_;
  std::shared_ptr<ResponseCache> cache_;
};

struct EndpointOptions {
  std::string api_key;
  RetryPolicy retry;
  std::shared_ptr<ResponseCache> cache;  // null disables caching
};

/// Builds cache(retry(base)) from "[name=]mock:<script.json>" or
/// "[name=]http(s)://host/path".
std::shared_ptr<ChatEndpoint> make_chat_endpoint(const std::string &spec,
                                                 const EndpointOptions &options);

}  // namespace rirbench::labeling

#endif  // RIRBENCH_CHAT_HPP_
