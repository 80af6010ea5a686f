// tests/unit/test_embedding.cpp

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

#include <cmath>
#include <random>

#include "doctest.h"
#include "rirbench/embedding.hpp"
#include "rirbench/util.hpp"
#include "test_support.hpp"

using namespace rirbench;
using namespace rirbench::embedding;
using nlohmann::json;

namespace {

std::vector<double> random_vector(std::mt19937 &rng, std::size_t dim) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(dim);
  for (auto &x : v) x = n(rng);
  return v;
}

// Plain long-double cosine without rescaling.
double naive_cosine(const std::vector<double> &a, const std::vector<double> &b) {
  long double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<long double>(a[i]) * b[i];
    na += static_cast<long double>(a[i]) * a[i];
    nb += static_cast<long double>(b[i]) * b[i];
  }
  return static_cast<double>(dot / std::sqrt(na * nb));
}

TableEmbeddingEndpoint orthonormal_table() {
  return TableEmbeddingEndpoint(json{{"pooling", "mean"},
                                     {"vectors",
                                      {{"hall", {1, 0, 0}},
                                       {"booth", {0, 1, 0}},
                                       {"church", {0, 0, 1}},
                                       {"a large hall", {1, 0, 0}}}}});
}

}  // namespace

TEST_SUITE("cosine") {
  TEST_CASE("hand cases") {
    const std::vector<double> a{1, 2, 3}, a2{2, 4, 6}, neg{-1, -2, -3}, x{1, 0}, y{0, 1};
    CHECK(cosine_similarity(a, a) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(cosine_similarity(a, a2) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(cosine_similarity(a, neg) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(cosine_similarity(x, y) == 0.0);
    CHECK(cosine_similarity(std::vector<double>{1, 1}, x) == doctest::Approx(1.0 / std::sqrt(2.0)));
  }

  TEST_CASE("properties on random vectors") {
    std::mt19937 rng(21);
    for (int k = 0; k < 300; ++k) {
      const std::size_t dim = 1 + rng() % 64;
      const auto a = random_vector(rng, dim), b = random_vector(rng, dim);
      const double c = cosine_similarity(a, b);
      REQUIRE(c >= -1.0);
      REQUIRE(c <= 1.0);
      REQUIRE(c == cosine_similarity(b, a));
      REQUIRE(std::abs(c - naive_cosine(a, b)) < 1e-12);
      auto scaled = a;
      const double s = std::exp(std::uniform_real_distribution<double>(-20, 20)(rng));
      for (auto &v : scaled) v *= s;
      REQUIRE(std::abs(cosine_similarity(scaled, b) - c) < 1e-12);
    }
  }

  TEST_CASE("extreme magnitudes stay finite and clamped") {
    const std::vector<double> big{1e300, 1e300}, tiny{1e-300, 1e-300};
    CHECK(cosine_similarity(big, big) == doctest::Approx(1.0));
    CHECK(cosine_similarity(tiny, big) == doctest::Approx(1.0));
    CHECK(cosine_similarity(big, big) <= 1.0);
  }

  TEST_CASE("errors") {
    const std::vector<double> z{0, 0, 0}, a{1, 2, 3}, b{1, 2};
    CHECK_THROWS_AS(cosine_similarity(z, a), PreconditionError);
    CHECK_THROWS_WITH(cosine_similarity(a, b), doctest::Contains("dimension mismatch"));
    CHECK_THROWS_AS(cosine_similarity(std::vector<double>{}, std::vector<double>{}), PreconditionError);
  }
}

TEST_SUITE("similarity report") {
  TEST_CASE("identical strings give mean one") {
    HashingEmbeddingEndpoint ep(64);
    std::vector<TextPair> pairs{{"1", "a reverberant hall", "a reverberant hall"},
                                {"2", "small dry booth", "small dry booth"}};
    const auto r = similarity_report(pairs, ep, "raw");
    REQUIRE(r.mean.has_value());
    CHECK(*r.mean == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.n_ok == 2);
    CHECK(r.n_failed == 0);
  }

  TEST_CASE("orthonormal table, one pair of three matched") {
    auto ep = orthonormal_table();
    std::vector<TextPair> pairs{
        {"1", "hall", "a large hall"}, {"2", "hall", "booth"}, {"3", "booth", "church"}};
    const auto r = similarity_report(pairs, ep, "raw", 2);
    REQUIRE(r.mean.has_value());
    CHECK(*r.mean == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(*r.pairs[0].similarity == 1.0);
    CHECK(*r.pairs[1].similarity == 0.0);
    CHECK(to_json(r)["n_ok"] == 3);
  }

  TEST_CASE("failed pairs are excluded and counted") {
    auto ep = orthonormal_table();
    std::vector<TextPair> pairs{{"1", "hall", "a large hall"}, {"2", "unknown", "booth"}};
    const auto r = similarity_report(pairs, ep, "raw");
    CHECK(r.n_ok == 1);
    CHECK(r.n_failed == 1);
    CHECK(*r.mean == 1.0);
    CHECK_FALSE(r.pairs[1].similarity.has_value());
    CHECK(r.pairs[1].error->find("unknown") != std::string::npos);
    CHECK(to_json(r)["pairs"][1]["similarity"].is_null());

    std::vector<TextPair> all_bad{{"1", "x", "y"}};
    const auto none = similarity_report(all_bad, ep, "raw");
    CHECK_FALSE(none.mean.has_value());
    CHECK(to_json(none)["mean"].is_null());
    CHECK_THROWS_AS(similarity_report(std::span<const TextPair>{}, ep, "raw"), PreconditionError);
  }

  TEST_CASE("raw vs refined comparison") {
    auto ep = orthonormal_table();
    std::vector<TextPair> raw{{"1", "booth", "a large hall"}, {"2", "church", "booth"}};
    std::vector<TextPair> refined{{"1", "hall", "a large hall"}, {"2", "church", "booth"}};
    const auto c = compare_conditions(raw, refined, ep);
    CHECK(*c.raw.mean == 0.0);
    CHECK(*c.refined.mean == 0.5);
    CHECK(*c.difference == 0.5);
    const auto j = to_json(c);
    CHECK(j["metadata"]["pooling"] == "mean");
    CHECK(j["metadata"]["metric"] == "cosine");
    CHECK(j["rows"].size() == 2);
  }

  TEST_CASE("dimension drift between calls is rejected") {
    TableEmbeddingEndpoint ep(json{{"vectors", {{"a", {1, 0}}, {"b", {1, 0, 0}}}}});
    std::vector<TextPair> pairs{{"1", "a", "b"}};
    CHECK_THROWS_AS(similarity_report(pairs, ep, "raw"), ContentError);
  }
}

TEST_SUITE("embedding endpoints") {
  TEST_CASE("hashing encoder is deterministic and case-insensitive") {
    HashingEmbeddingEndpoint ep(32);
    CHECK(ep.embed("Stone Church") == ep.embed("stone   church!"));
    double mass = 0;
    for (double v : ep.embed("one two three")) mass += std::abs(v);
    CHECK(mass <= 3.0);
    CHECK_THROWS_AS(HashingEmbeddingEndpoint(0), ParameterError);
  }

  TEST_CASE("spec parsing, retry and cache") {
    const auto dir = rirbench::testing::temp_dir("embed");
    write_text_file(dir / "t.json", R"({"name":"tbl","vectors":{"x":[1,2]}})");
    auto cache = std::make_shared<ResponseCache>();
    auto ep = make_embedding_endpoint("mock:" + (dir / "t.json").string(), "", RetryPolicy::immediate(2),
                                      cache);
    CHECK(ep->name() == "tbl");
    CHECK(ep->embed("x") == std::vector<double>{1, 2});
    CHECK(cache->size() == 1);
    CHECK_THROWS_AS(ep->embed("y"), TransportError);
    CHECK(make_embedding_endpoint("hash:16", "", {}, nullptr)->embed("a").size() == 16);
    CHECK_THROWS_AS(make_embedding_endpoint("hash:x", "", {}, nullptr), ParameterError);
    CHECK_THROWS_AS(make_embedding_endpoint("file:x", "", {}, nullptr), PreconditionError);
    std::filesystem::remove_all(dir);
  }
}
