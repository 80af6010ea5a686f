// tests/unit/test_pipeline.cpp

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
#include <fstream>

#include "doctest.h"
#include "rirbench/pipeline.hpp"
#include "rirbench/util.hpp"
#include "rirbench/wav.hpp"
#include "test_support.hpp"

using namespace rirbench;
using namespace rirbench::pipeline;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char *kRooms[] = {"room 5 by 4 by 3 meters, alpha 0.35",
                        "room 6 by 5 by 3 meters, moderate absorption",
                        "room 3 by 3 by 2.4 meters, absorptive absorption"};

// Ground truths rendered by the baseline at 48 kHz, so evaluation has to
// resample them to the common rate.
fs::path write_rt60_fixture(const fs::path &dir) {
  room::IsmBaselineGenerator gen;
  std::ofstream manifest(dir / "rt60.jsonl");
  for (std::size_t i = 0; i < std::size(kRooms); ++i) {
    const auto out = gen.generate({kRooms[i], 1, 48000});
    const std::string file = "gt" + std::to_string(i) + ".wav";
    audio::write_wav(dir / file, audio::AudioBuffer(out.rir), audio::WavFormat::kFloat32);
    manifest << json{{"id", "r" + std::to_string(i)}, {"prompt", kRooms[i]}, {"gt_rir", file}}.dump() << "\n";
  }
  manifest << json{{"id", "broken"}, {"prompt", "a lovely hall"}, {"gt_rir", "gt0.wav"}}.dump() << "\n";
  return dir / "rt60.jsonl";
}

}  // namespace

TEST_CASE("rt60 evaluation closes the loop on its own ground truths") {
  const auto dir = rirbench::testing::temp_dir("pipe-rt60");
  const auto items = read_rt60_manifest(write_rt60_fixture(dir));
  REQUIRE(items.size() == 4);
  CHECK(items[0].gt_rir == dir / "gt0.wav");
  room::IsmBaselineGenerator gen;
  const auto report = eval_rt60(items, gen, {16000, 1, 2}, "run");
  CHECK(report["n"] == 3);
  CHECK(report["n_failed"] == 1);
  CHECK(report["failures"][0]["id"] == "broken");
  CHECK(std::abs(report["mean_error_pct"].get<double>()) < 5.0);
  for (const auto &row : report["per_sample"]) CHECK(std::abs(row["error_pct"].get<double>()) < 5.0);
  CHECK(report["common_rate_hz"] == 16000);
  CHECK(report["generator"] == "ism-baseline");
  // Deterministic across job counts.
  const auto again = eval_rt60(items, gen, {16000, 1, 1}, "run");
  CHECK(again.dump() == report.dump());
  CHECK_THROWS_AS(eval_rt60(items, gen, {0, 1, 1}, "run"), ParameterError);
  fs::remove_all(dir);
}

TEST_CASE("run identifiers") {
  CHECK(run_id({{"a", 1}}) == run_id({{"a", 1}}));
  CHECK(run_id({{"a", 1}}) != run_id({{"a", 2}}));
  CHECK(run_id({{"a", 1}}).size() == 16);
}

TEST_CASE("embedding pair files") {
  const auto dir = rirbench::testing::temp_dir("pipe-embed");
  write_text_file(dir / "cmp.jsonl",
                  "{\"id\":\"1\",\"reference\":\"hall\",\"raw\":\"booth\",\"refined\":\"hall\"}\n"
                  "{\"id\":\"2\",\"reference\":\"hall\",\"raw\":\"hall\",\"refined\":\"hall\"}\n");
  const auto cmp = read_embed_pairs(dir / "cmp.jsonl");
  CHECK(cmp.raw.size() == 2);
  CHECK(cmp.single.empty());
  embedding::TableEmbeddingEndpoint ep(json{{"vectors", {{"hall", {1, 0}}, {"booth", {0, 1}}}}});
  const auto j = eval_embed(cmp, ep, 1);
  CHECK(j["raw"] == 0.5);
  CHECK(j["refined"] == 1.0);
  CHECK(j["difference"] == 0.5);

  write_text_file(dir / "single.jsonl", "{\"reference\":\"hall\",\"candidate\":\"booth\"}\n");
  const auto single = read_embed_pairs(dir / "single.jsonl");
  CHECK(single.single.at(0).id == "row1");
  CHECK(eval_embed(single, ep, 1)["rows"][0]["mean"] == 0.0);

  write_text_file(dir / "mixed.jsonl",
                  "{\"reference\":\"a\",\"raw\":\"b\",\"refined\":\"c\"}\n{\"reference\":\"a\",\"candidate\":\"b\"}\n");
  CHECK_THROWS_AS(read_embed_pairs(dir / "mixed.jsonl"), ParseError);
  write_text_file(dir / "bad.jsonl", "{\"reference\":\"a\"}\n");
  CHECK_THROWS_AS(read_embed_pairs(dir / "bad.jsonl"), ParseError);
  fs::remove_all(dir);
}

TEST_CASE("speech manifests and external PESQ") {
  const auto dir = rirbench::testing::temp_dir("pipe-speech");
  write_text_file(dir / "s.jsonl",
                  "{\"id\":\"u1\",\"clean\":\"c.wav\",\"gt_rir\":\"g.wav\",\"generated_rir\":\"n.wav\",\"transcript\":\"hi\"}\n"
                  "{\"id\":\"u2\",\"clean\":\"c.wav\",\"gt_rir\":\"g.wav\",\"generated_rir\":\"n.wav\"}\n");
  const auto items = read_speech_manifest(dir / "s.jsonl", {{"u2", "from table"}});
  CHECK(items[0].transcript == "hi");
  CHECK(items[1].transcript == "from table");
  CHECK(items[1].clean == dir / "c.wav");
  try {
    read_speech_manifest(dir / "s.jsonl", {});
    FAIL("expected ValidationError");
  } catch (const ValidationError &e) {
    CHECK(e.ids() == std::vector<std::string>{"u2"});
  }
  write_text_file(dir / "pesq.tsv", "u1\t3.5\t2.9\n\n");
  speech::SpeechReport r;
  load_pesq(dir / "pesq.tsv", r);
  CHECK(r.pesq_gt.at("u1") == 3.5);
  CHECK(r.pesq_generated.at("u1") == 2.9);
  write_text_file(dir / "bad.tsv", "u1\tthree\n");
  CHECK_THROWS_AS(load_pesq(dir / "bad.tsv", r), ParseError);
  fs::remove_all(dir);
}
