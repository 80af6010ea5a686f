// include/rirbench/util.hpp

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

#ifndef RIRBENCH_UTIL_HPP_
#define RIRBENCH_UTIL_HPP_

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "rirbench/errors.hpp"

namespace rirbench {

/// Lowercase hex SHA-256 of arbitrary bytes.
std::string sha256_hex(std::string_view data);

std::string read_text_file(const std::filesystem::path &path);
void write_text_file(const std::filesystem::path &path, std::string_view text);
std::vector<std::uint8_t> read_binary_file(const std::filesystem::path &path);

/// One JSON value per non-blank line. Throws ParseError with the line number.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path &path);
void write_jsonl(const std::filesystem::path &path, const std::vector<nlohmann::json> &rows);

std::string trim(std::string_view s);

/// Runs fn(i) for i in [0, n) on at most `jobs` threads. The first exception
/// thrown by any task is rethrown after all workers stop.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)> &fn);

/// Resolves `path` against `base` unless it is already absolute.
std::filesystem::path resolve_path(const std::filesystem::path &base,
                                   const std::filesystem::path &path);

namespace http {

struct Response {
  int status = 0;
  std::string body;
  std::map<std::string, std::string> headers;
};

struct Url {
  std::string scheme_host_port;  // e.g. http://localhost:8080
  std::string path;              // e.g. /v1/chat
};

Url split_url(const std::string &url);

/// Blocking POST. Throws TransportError on connection failure or a non-2xx
/// status.
Response post(const std::string &url, const std::string &body, const std::string &content_type,
              const std::map<std::string, std::string> &headers = {},
              double timeout_seconds = 120.0);

std::string base64_encode(std::span<const std::uint8_t> bytes);

}  // namespace http

}  // namespace rirbench

#endif  // RIRBENCH_UTIL_HPP_
