// src/labeling/chat.cpp

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

#include "rirbench/chat.hpp"

#include "rirbench/util.hpp"

namespace rirbench::labeling {

namespace {

std::string replace_all(std::string s, const std::string &from, const std::string &to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size())
    s.replace(pos, from.size(), to);
  return s;
}

std::string user_text(const ChatRequest &r) {
  std::string t;
  for (const auto &m : r.messages) {
    if (!t.empty()) t += "\n";
    t += m.text;
  }
  return t;
}

}  // namespace

std::string ChatRequest::user_content() const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto &m : messages) {
    nlohmann::json e{{"role", m.role}, {"text", m.text}};
    if (m.image_ref) e["image_ref"] = *m.image_ref;
    j.push_back(e);
  }
  return j.dump();
}

ScriptedChatEndpoint::ScriptedChatEndpoint(nlohmann::json script, std::string name_override)
    : script_(std::move(script)) {
  name_ = !name_override.empty() ? name_override : script_.value("name", std::string("mock"));
  rule_hits_.assign(script_.value("rules", nlohmann::json::array()).size(), 0);
}

std::shared_ptr<ScriptedChatEndpoint> ScriptedChatEndpoint::from_file(
    const std::filesystem::path &path, std::string name_override) {
  nlohmann::json script;
  try {
    script = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error &e) {
    throw ParseError("mock script " + path.string() + ": " + e.what());
  }
  if (name_override.empty() && !script.contains("name"))
    name_override = path.stem().string();
  return std::make_shared<ScriptedChatEndpoint>(std::move(script), std::move(name_override));
}

std::string ScriptedChatEndpoint::complete(const ChatRequest &request) {
  ++calls_;
  const std::string user = user_text(request);
  std::string haystack = request.system + "\n" + user;
  for (const auto &m : request.messages)
    if (m.image_ref) haystack += "\n" + *m.image_ref;

  std::lock_guard<std::mutex> lock(mutex_);
  const auto rules = script_.value("rules", nlohmann::json::array());
  for (std::size_t i = 0; i < rules.size(); ++i) {
    const auto &rule = rules[i];
    const auto needle = rule.value("contains", std::string());
    if (!needle.empty() && haystack.find(needle) == std::string::npos) continue;
    const int hit = rule_hits_[i]++;
    if (rule.contains("error")) {
      const int fail_times = rule.value("fail_times", -1);
      if (fail_times < 0 || hit < fail_times)
        throw TransportError(name_ + ": " + rule["error"].get<std::string>());
    }
    return replace_all(rule.value("reply", std::string()), "{{user}}", user);
  }
  if (script_.contains("sequence") && sequence_pos_ < script_["sequence"].size())
    return replace_all(script_["sequence"][sequence_pos_++].get<std::string>(), "{{user}}", user);
  if (script_.contains("echo_prefix"))
    return script_["echo_prefix"].get<std::string>() + user;
  if (script_.contains("default") && script_["default"].is_string())
    return replace_all(script_["default"].get<std::string>(), "{{user}}", user);
  throw TransportError(name_ + ": script has no reply for this request");
}

HttpChatEndpoint::HttpChatEndpoint(std::string name, std::string url, std::string api_key,
                                   double timeout_seconds)
    : name_(std::move(name)), url_(std::move(url)), api_key_(std::move(api_key)),
      timeout_(timeout_seconds) {}

std::string HttpChatEndpoint::complete(const ChatRequest &request) {
  nlohmann::json body{{"system", request.system}, {"messages", nlohmann::json::array()}};
  for (const auto &m : request.messages) {
    nlohmann::json e{{"role", m.role}, {"text", m.text}};
    if (m.image_ref) e["image_b64"] = http::base64_encode(read_binary_file(*m.image_ref));
    body["messages"].push_back(std::move(e));
  }
  std::map<std::string, std::string> headers;
  if (!api_key_.empty()) headers["Authorization"] = "Bearer " + api_key_;
  const auto res = http::post(url_, body.dump(), "application/json", headers, timeout_);
  try {
    return nlohmann::json::parse(res.body).at("text").get<std::string>();
  } catch (const nlohmann::json::exception &e) {
    throw ContentError(name_ + ": malformed chat response: " + e.what());
  }
}

std::string RetryingChatEndpoint::complete(const ChatRequest &request) {
  return with_retry(policy_, name(), [&] { return inner_->complete(request); });
}

std::string CachedChatEndpoint::complete(const ChatRequest &request) {
  const auto key = exchange_key(name(), request.system, request.user_content());
  if (auto hit = cache_->lookup(key)) return hit->get<std::string>();
  auto reply = inner_->complete(request);
  cache_->store(key, reply);
  return reply;
}

std::shared_ptr<ChatEndpoint> make_chat_endpoint(const std::string &text,
                                                 const EndpointOptions &options) {
  auto [name, spec] = split_named_spec(text);
  std::shared_ptr<ChatEndpoint> base;
  if (spec.rfind("mock:", 0) == 0) {
    base = ScriptedChatEndpoint::from_file(spec.substr(5), name);
  } else if (spec.rfind("http://", 0) == 0 || spec.rfind("https://", 0) == 0) {
    base = std::make_shared<HttpChatEndpoint>(name.empty() ? spec : name, spec, options.api_key);
  } else {
    throw PreconditionError("chat endpoint must be '[name=]mock:<file>' or '[name=]http(s)://...',"
                            " got '" + text + "'");
  }
  base = std::make_shared<RetryingChatEndpoint>(base, options.retry);
  if (options.cache) base = std::make_shared<CachedChatEndpoint>(base, options.cache);
  return base;
}

}  // namespace rirbench::labeling
