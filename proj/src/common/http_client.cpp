// src/common/http_client.cpp

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

#include "rirbench/util.hpp"

namespace rirbench::http {

Url split_url(const std::string &url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw PreconditionError("URL must start with http:// or https://: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  Url u;
  if (path_start == std::string::npos) {
    u.scheme_host_port = url;
    u.path = "/";
  } else {
    u.scheme_host_port = url.substr(0, path_start);
    u.path = url.substr(path_start);
  }
  return u;
}

Response post(const std::string &url, const std::string &body, const std::string &content_type,
              const std::map<std::string, std::string> &headers, double timeout_seconds) {
  const Url u = split_url(url);
  httplib::Client client(u.scheme_host_port);
  const auto secs = static_cast<time_t>(timeout_seconds);
  client.set_connection_timeout(std::min<time_t>(secs, 10), 0);
  client.set_read_timeout(secs, 0);
  client.set_write_timeout(secs, 0);
  httplib::Headers h;
  for (const auto &[k, v] : headers) h.emplace(k, v);
  auto res = client.Post(u.path, h, body, content_type);
  if (!res)
    throw TransportError("POST " + url + " failed: " + httplib::to_string(res.error()));
  Response out;
  out.status = res->status;
  out.body = res->body;
  for (const auto &[k, v] : res->headers) out.headers[k] = v;
  if (res->status < 200 || res->status >= 300)
    throw TransportError("POST " + url + " returned HTTP " + std::to_string(res->status) +
                         ": " + res->body.substr(0, 200));
  return out;
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  return httplib::detail::base64_encode(
      std::string(reinterpret_cast<const char *>(bytes.data()), bytes.size()));
}

}  // namespace rirbench::http
