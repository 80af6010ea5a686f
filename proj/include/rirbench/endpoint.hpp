// include/rirbench/endpoint.hpp

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

#ifndef RIRBENCH_ENDPOINT_HPP_
#define RIRBENCH_ENDPOINT_HPP_

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>

#include "json.hpp"
#include "rirbench/errors.hpp"

namespace rirbench {

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{1000};
  double multiplier = 2.0;

  static RetryPolicy immediate(int attempts = 3) {
    return RetryPolicy{attempts, std::chrono::milliseconds(0), 1.0};
  }
};

/// Calls fn until it returns without a TransportError or the attempt budget
/// is spent; the final error reports the attempt count.
template <class Fn>
auto with_retry(const RetryPolicy &policy, const std::string &what, Fn &&fn) -> decltype(fn()) {
  auto backoff = policy.initial_backoff;
  for (int attempt = 1;; ++attempt) {
    try {
      return fn();
    } catch (const TransportError &e) {
      if (attempt >= policy.max_attempts)
        throw TransportError(what + " failed after " + std::to_string(attempt) +
                                 " attempt(s): " + e.what(),
                             attempt);
      if (backoff.count() > 0) std::this_thread::sleep_for(backoff);
      backoff = std::chrono::milliseconds(
          static_cast<long long>(static_cast<double>(backoff.count()) * policy.multiplier));
    }
  }
}

/// Append-only key -> JSON value store. Many concurrent readers, one writer.
/// With an empty path the cache lives in memory only.
class ResponseCache {
 public:
  ResponseCache() = default;
  explicit ResponseCache(std::filesystem::path path);

  std::optional<nlohmann::json> lookup(const std::string &key) const;
  void store(const std::string &key, const nlohmann::json &value);
  std::size_t size() const;

 private:
  std::filesystem::path path_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, nlohmann::json> entries_;
};

/// Key for one endpoint exchange: hashes of name, system part, user part.
std::string exchange_key(const std::string &endpoint, const std::string &system,
                         const std::string &user);

/// Splits "name=spec" into {name, spec}; name empty when absent. A leading
/// scheme such as "http://" is never mistaken for a name.
std::pair<std::string, std::string> split_named_spec(const std::string &text);

}  // namespace rirbench

#endif  // RIRBENCH_ENDPOINT_HPP_
