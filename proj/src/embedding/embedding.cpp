// src/embedding/embedding.cpp

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

#include "rirbench/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <set>

#include "rirbench/util.hpp"

namespace rirbench::embedding {

namespace {

std::vector<double> parse_vector(const nlohmann::json &j, const std::string &who) {
  if (!j.is_array() || j.empty()) throw ContentError(who + ": embedding is not a non-empty array");
  std::vector<double> v;
  v.reserve(j.size());
  for (const auto &e : j) {
    if (!e.is_number()) throw ContentError(who + ": embedding has a non-numeric entry");
    v.push_back(e.get<double>());
  }
  return v;
}

void require_finite(const std::vector<double> &v, const std::string &who) {
  for (double x : v)
    if (!std::isfinite(x)) throw ContentError(who + ": embedding has a non-finite entry");
}

}  // namespace

HttpEmbeddingEndpoint::HttpEmbeddingEndpoint(std::string name, std::string url,
                                             std::string api_key, double timeout_seconds)
    : name_(std::move(name)), url_(std::move(url)), api_key_(std::move(api_key)),
      timeout_(timeout_seconds) {}

std::vector<double> HttpEmbeddingEndpoint::embed(const std::string &text) {
  std::map<std::string, std::string> headers;
  if (!api_key_.empty()) headers["Authorization"] = "Bearer " + api_key_;
  const auto res =
      http::post(url_, nlohmann::json{{"text", text}}.dump(), "application/json", headers, timeout_);
  nlohmann::json body;
  try {
    body = nlohmann::json::parse(res.body);
  } catch (const nlohmann::json::exception &e) {
    throw ContentError(name_ + ": malformed embedding response: " + e.what());
  }
  if (body.contains("pooling") && body["pooling"].is_string()) {
    std::lock_guard lock(mutex_);
    pooling_ = body["pooling"].get<std::string>();
  }
  return parse_vector(body.value("vector", nlohmann::json()), name_);
}

std::string HttpEmbeddingEndpoint::pooling() const {
  std::lock_guard lock(mutex_);
  return pooling_;
}

TableEmbeddingEndpoint::TableEmbeddingEndpoint(nlohmann::json table, std::string name)
    : name_(std::move(name)), pooling_(table.value("pooling", std::string("lookup table"))) {
  if (!table.contains("vectors") || !table["vectors"].is_object())
    throw ParseError("embedding table needs a 'vectors' object");
  for (const auto &[text, vec] : table["vectors"].items())
    vectors_[text] = parse_vector(vec, name_);
}

std::shared_ptr<TableEmbeddingEndpoint> TableEmbeddingEndpoint::from_file(
    const std::filesystem::path &path, std::string name) {
  nlohmann::json table;
  try {
    table = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error &e) {
    throw ParseError("embedding table " + path.string() + ": " + e.what());
  }
  if (name.empty()) name = table.value("name", path.stem().string());
  return std::make_shared<TableEmbeddingEndpoint>(std::move(table), std::move(name));
}

std::vector<double> TableEmbeddingEndpoint::embed(const std::string &text) {
  auto it = vectors_.find(text);
  if (it == vectors_.end()) throw TransportError(name_ + ": no vector for text '" + text + "'");
  return it->second;
}

HashingEmbeddingEndpoint::HashingEmbeddingEndpoint(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw ParameterError("dim", "must be positive");
}

std::vector<double> HashingEmbeddingEndpoint::embed(const std::string &text) {
  std::vector<double> v(dim_, 0.0);
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    const std::string h = sha256_hex(token);
    const std::uint64_t bits = std::stoull(h.substr(0, 15), nullptr, 16);
    v[(bits >> 1) % dim_] += (bits & 1) ? 1.0 : -1.0;
    token.clear();
  };
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c)))
      token += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    else
      flush();
  }
  flush();
  return v;
}

std::vector<double> RetryingEmbeddingEndpoint::embed(const std::string &text) {
  return with_retry(policy_, name(), [&] { return inner_->embed(text); });
}

std::vector<double> CachedEmbeddingEndpoint::embed(const std::string &text) {
  const auto key = exchange_key(name(), "embed", text);
  if (auto hit = cache_->lookup(key)) return hit->get<std::vector<double>>();
  auto v = inner_->embed(text);
  cache_->store(key, v);
  return v;
}

std::shared_ptr<EmbeddingEndpoint> make_embedding_endpoint(const std::string &text,
                                                           const std::string &api_key,
                                                           const RetryPolicy &retry,
                                                           std::shared_ptr<ResponseCache> cache) {
  auto [name, spec] = split_named_spec(text);
  if (spec.rfind("hash:", 0) == 0) {
    std::size_t dim = 0;
    try {
      dim = std::stoul(spec.substr(5));
    } catch (const std::exception &) {
      throw ParameterError("endpoint", "hash:<dim> needs an integer dimension");
    }
    return std::make_shared<HashingEmbeddingEndpoint>(dim);
  }
  std::shared_ptr<EmbeddingEndpoint> base;
  if (spec.rfind("mock:", 0) == 0) {
    base = TableEmbeddingEndpoint::from_file(spec.substr(5), name);
  } else if (spec.rfind("http://", 0) == 0 || spec.rfind("https://", 0) == 0) {
    base = std::make_shared<HttpEmbeddingEndpoint>(name.empty() ? spec : name, spec, api_key);
  } else {
    throw PreconditionError("embedding endpoint must be 'hash:<dim>', '[name=]mock:<file>' or "
                            "'[name=]http(s)://...', got '" + text + "'");
  }
  base = std::make_shared<RetryingEmbeddingEndpoint>(base, retry);
  if (cache) base = std::make_shared<CachedEmbeddingEndpoint>(base, std::move(cache));
  return base;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw PreconditionError("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()));
  if (a.empty()) throw PreconditionError("empty vector");
  // Rescale by the largest magnitude first so extreme inputs neither
  // overflow nor underflow in the products.
  double sa = 0.0, sb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa = std::max(sa, std::abs(a[i]));
    sb = std::max(sb, std::abs(b[i]));
  }
  if (sa == 0.0 || sb == 0.0) throw PreconditionError("zero vector");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i] / sa, y = b[i] / sb;
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

nlohmann::json to_json(const SimilarityReport &r) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto &p : r.pairs) {
    nlohmann::json e{{"id", p.id},
                     {"similarity", p.similarity ? nlohmann::json(*p.similarity) : nlohmann::json()}};
    if (p.error) e["error"] = *p.error;
    pairs.push_back(std::move(e));
  }
  return {{"condition", r.condition},
          {"mean", r.mean ? nlohmann::json(*r.mean) : nlohmann::json()},
          {"n_ok", r.n_ok},
          {"n_failed", r.n_failed},
          {"pairs", pairs}};
}

SimilarityReport similarity_report(std::span<const TextPair> pairs, EmbeddingEndpoint &endpoint,
                                   const std::string &condition, std::size_t jobs) {
  if (pairs.empty()) throw PreconditionError("no text pairs for condition '" + condition + "'");
  std::set<std::string> unique;
  for (const auto &p : pairs) {
    unique.insert(p.candidate);
    unique.insert(p.reference);
  }
  const std::vector<std::string> texts(unique.begin(), unique.end());
  std::vector<std::optional<std::vector<double>>> vecs(texts.size());
  std::vector<std::string> errors(texts.size());
  parallel_for(texts.size(), jobs, [&](std::size_t i) {
    try {
      auto v = endpoint.embed(texts[i]);
      require_finite(v, endpoint.name());
      vecs[i] = std::move(v);
    } catch (const Error &e) {
      errors[i] = e.what();
    }
  });

  std::optional<std::size_t> dim;
  for (const auto &v : vecs) {
    if (!v) continue;
    if (dim && *dim != v->size())
      throw ContentError(endpoint.name() + ": embedding dimension changed between calls (" +
                         std::to_string(*dim) + " vs " + std::to_string(v->size()) + ")");
    dim = v->size();
  }

  auto index_of = [&](const std::string &t) {
    return static_cast<std::size_t>(std::lower_bound(texts.begin(), texts.end(), t) - texts.begin());
  };
  SimilarityReport r;
  r.condition = condition;
  double sum = 0.0;
  for (const auto &p : pairs) {
    PairSimilarity ps{p.id, std::nullopt, std::nullopt};
    const auto ic = index_of(p.candidate), ir = index_of(p.reference);
    try {
      if (!vecs[ic]) throw ContentError(errors[ic]);
      if (!vecs[ir]) throw ContentError(errors[ir]);
      ps.similarity = cosine_similarity(*vecs[ic], *vecs[ir]);
      sum += *ps.similarity;
      ++r.n_ok;
    } catch (const Error &e) {
      ps.error = e.what();
      ++r.n_failed;
    }
    r.pairs.push_back(std::move(ps));
  }
  if (r.n_ok > 0) r.mean = sum / static_cast<double>(r.n_ok);
  return r;
}

nlohmann::json to_json(const ConditionComparison &c) {
  return {{"rows", {to_json(c.raw), to_json(c.refined)}},
          {"raw", c.raw.mean ? nlohmann::json(*c.raw.mean) : nlohmann::json()},
          {"refined", c.refined.mean ? nlohmann::json(*c.refined.mean) : nlohmann::json()},
          {"difference", c.difference ? nlohmann::json(*c.difference) : nlohmann::json()},
          {"metadata", {{"endpoint", c.endpoint}, {"pooling", c.pooling}, {"metric", "cosine"}}}};
}

ConditionComparison compare_conditions(std::span<const TextPair> raw,
                                       std::span<const TextPair> refined,
                                       EmbeddingEndpoint &endpoint, std::size_t jobs) {
  ConditionComparison c;
  c.raw = similarity_report(raw, endpoint, "raw", jobs);
  c.refined = similarity_report(refined, endpoint, "refined", jobs);
  if (c.raw.mean && c.refined.mean) c.difference = *c.refined.mean - *c.raw.mean;
  c.endpoint = endpoint.name();
  c.pooling = endpoint.pooling();
  return c;
}

}  // namespace rirbench::embedding
