// src/common/endpoint.cpp

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

#include "rirbench/endpoint.hpp"

#include <mutex>

#include "rirbench/util.hpp"

namespace rirbench {

ResponseCache::ResponseCache(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.empty() || !std::filesystem::exists(path_)) return;
  for (const auto &row : read_jsonl(path_)) {
    // First write wins, so replay is deterministic even if a key was
    // appended twice by racing processes.
    entries_.emplace(row.at("key").get<std::string>(), row.at("value"));
  }
}

std::optional<nlohmann::json> ResponseCache::lookup(const std::string &key) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ResponseCache::store(const std::string &key, const nlohmann::json &value) {
  std::unique_lock lock(mutex_);
  if (!entries_.emplace(key, value).second) return;
  if (path_.empty()) return;
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) throw IoError("cannot append to cache " + path_.string());
  out << nlohmann::json{{"key", key}, {"value", value}}.dump() << '\n';
}

std::size_t ResponseCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

std::string exchange_key(const std::string &endpoint, const std::string &system,
                         const std::string &user) {
  return sha256_hex(endpoint).substr(0, 16) + ":" + sha256_hex(system) + ":" + sha256_hex(user);
}

std::pair<std::string, std::string> split_named_spec(const std::string &text) {
  const auto eq = text.find('=');
  const auto colon = text.find(':');
  if (eq == std::string::npos || (colon != std::string::npos && colon < eq)) return {"", text};
  return {text.substr(0, eq), text.substr(eq + 1)};
}

}  // namespace rirbench
