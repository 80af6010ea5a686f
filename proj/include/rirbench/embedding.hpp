// include/rirbench/embedding.hpp

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

#ifndef RIRBENCH_EMBEDDING_HPP_
#define RIRBENCH_EMBEDDING_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "rirbench/endpoint.hpp"

namespace rirbench::embedding {

/// A text encoder returning one vector per text. The dimension must not
/// change between calls.
class EmbeddingEndpoint {
 public:
  virtual ~EmbeddingEndpoint() = default;
  virtual std::vector<double> embed(const std::string &text) = 0;
  virtual std::string name() const = 0;
  /// How token embeddings are reduced to one vector; recorded in reports.
  virtual std::string pooling() const { return "endpoint-defined"; }
};

/// POST {text} -> {vector: [floats], pooling?}.
class HttpEmbeddingEndpoint : public EmbeddingEndpoint {
 public:
  HttpEmbeddingEndpoint(std::string name, std::string url, std::string api_key = "",
                        double timeout_seconds = 120.0);
  std::vector<double> embed(const std::string &text) override;
  std::string name() const override { return name_; }
  std::string pooling() const override;

 private:
  std::string name_, url_, api_key_;
  double timeout_;
  mutable std::mutex mutex_;
  std::string pooling_ = "endpoint-defined";
};

/// Fixed lookup table {"vectors": {text: [..]}, "pooling": "..."}; unknown
/// texts fail like a transport error.
class TableEmbeddingEndpoint : public EmbeddingEndpoint {
 public:
  explicit TableEmbeddingEndpoint(nlohmann::json table, std::string name = "table");
  static std::shared_ptr<TableEmbeddingEndpoint> from_file(const std::filesystem::path &path,
                                                           std::string name = "");
  std::vector<double> embed(const std::string &text) override;
  std::string name() const override { return name_; }
  std::string pooling() const override { return pooling_; }

 private:
  std::map<std::string, std::vector<double>> vectors_;
  std::string name_, pooling_;
};

/// Deterministic bag-of-words feature hashing into `dim` buckets. Lowercased
/// alphanumeric tokens; sign taken from the hash.
class HashingEmbeddingEndpoint : public EmbeddingEndpoint {
 public:
  explicit HashingEmbeddingEndpoint(std::size_t dim);
  std::vector<double> embed(const std::string &text) override;
  std::string name() const override { return "hash" + std::to_string(dim_); }
  std::string pooling() const override { return "sum of hashed token indicators"; }

 private:
  std::size_t dim_;
};

class RetryingEmbeddingEndpoint : public EmbeddingEndpoint {
 public:
  RetryingEmbeddingEndpoint(std::shared_ptr<EmbeddingEndpoint> inner, RetryPolicy policy)
      : inner_(std::move(inner)), policy_(policy) {}
  std::vector<double> embed(const std::string &text) override;
  std::string name() const override { return inner_->name(); }
  std::string pooling() const override { return inner_->pooling(); }

 private:
  std::shared_ptr<EmbeddingEndpoint> inner_;
  RetryPolicy policy_;
};

class CachedEmbeddingEndpoint : public EmbeddingEndpoint {
 public:
  CachedEmbeddingEndpoint(std::shared_ptr<EmbeddingEndpoint> inner,
                          std::shared_ptr<ResponseCache> cache)
      : inner_(std::move(inner)), cache_(std::move(cache)) {}
  std::vector<double> embed(const std::string &text) override;
  std::string name() const override { return inner_->name(); }
  std::string pooling() const override { return inner_->pooling(); }

 private:
  std::shared_ptr<EmbeddingEndpoint> inner_;
  std::shared_ptr<ResponseCache> cache_;
};

/// "[name=]mock:<table.json>", "hash:<dim>" or "[name=]http(s)://...";
/// remote and table endpoints are wrapped as cache(retry(base)).
std::shared_ptr<EmbeddingEndpoint> make_embedding_endpoint(const std::string &spec,
                                                           const std::string &api_key,
                                                           const RetryPolicy &retry,
                                                           std::shared_ptr<ResponseCache> cache);

/// dot(a,b) / (|a||b|) clamped to [-1, 1]. Throws on a zero vector or a
/// dimension mismatch.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

struct TextPair {
  std::string id;
  std::string candidate;
  std::string reference;
};

struct PairSimilarity {
  std::string id;
  std::optional<double> similarity;
  std::optional<std::string> error;
};

struct SimilarityReport {
  std::string condition;
  std::vector<PairSimilarity> pairs;
  std::optional<double> mean;  // over successful pairs only
  std::size_t n_ok = 0;
  std::size_t n_failed = 0;
};

nlohmann::json to_json(const SimilarityReport &r);

/// Embeds every distinct text once, scores each pair. A pair whose
/// embedding fails is excluded from the mean and counted.
SimilarityReport similarity_report(std::span<const TextPair> pairs, EmbeddingEndpoint &endpoint,
                                   const std::string &condition, std::size_t jobs = 4);

/// Raw vs refined candidates against the same references.
struct ConditionComparison {
  SimilarityReport raw;
  SimilarityReport refined;
  std::optional<double> difference;  // refined.mean - raw.mean
  std::string endpoint;
  std::string pooling;
};

nlohmann::json to_json(const ConditionComparison &c);

ConditionComparison compare_conditions(std::span<const TextPair> raw,
                                       std::span<const TextPair> refined,
                                       EmbeddingEndpoint &endpoint, std::size_t jobs = 4);

}  // namespace rirbench::embedding

#endif  // RIRBENCH_EMBEDDING_HPP_
