// src/pipeline/pipeline.cpp

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

#include "rirbench/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <fstream>
#include <mutex>
#include <sstream>
#include <optional>

#include "rirbench/acoustics.hpp"
#include "rirbench/dsp.hpp"
#include "rirbench/util.hpp"
#include "rirbench/wav.hpp"

namespace rirbench::pipeline {

namespace {

std::string get_string(const nlohmann::json &j, const char *key, const std::filesystem::path &src) {
  if (!j.contains(key) || !j[key].is_string())
    throw ParseError(src.string() + ": record lacks string field '" + key + "'");
  return j[key].get<std::string>();
}

audio::ImpulseResponse at_rate(const audio::ImpulseResponse &rir, int rate) {
  return rir.sample_rate() == rate ? rir : audio::resample(rir, rate);
}

}  // namespace

std::string run_id(const nlohmann::json &inputs) { return sha256_hex(inputs.dump()).substr(0, 16); }

std::vector<Rt60Item> read_rt60_manifest(const std::filesystem::path &path) {
  std::vector<Rt60Item> items;
  for (const auto &j : read_jsonl(path))
    items.push_back({get_string(j, "id", path), get_string(j, "prompt", path),
                     resolve_path(path.parent_path(), get_string(j, "gt_rir", path))});
  return items;
}

nlohmann::json eval_rt60(const std::vector<Rt60Item> &items, room::GeneratorEndpoint &generator,
                         const Rt60EvalOptions &options, const std::string &run_id) {
  if (items.empty()) throw PreconditionError("RT60 manifest is empty");
  if (options.common_rate <= 0) throw ParameterError("common_rate", "must be positive");
  struct Row {
    double est, gt, err;
    std::string method, gt_method;
  };
  std::vector<std::optional<Row>> rows(items.size());
  std::vector<std::string> errors(items.size());
  parallel_for(items.size(), generator.concurrent_safe() ? options.jobs : 1, [&](std::size_t i) {
    try {
      room::GenerateRequest req{items[i].prompt, options.seed, options.common_rate};
      auto gen = generator.generate(req).rir;
      const auto est = acoustics::rt60(at_rate(gen, options.common_rate));
      const auto gt = acoustics::rt60(at_rate(audio::read_rir(items[i].gt_rir), options.common_rate));
      rows[i] = Row{est.seconds, gt.seconds, acoustics::rt60_percent_error(est.seconds, gt.seconds),
                    acoustics::to_string(est.method), acoustics::to_string(gt.method)};
    } catch (const Error &e) {
      errors[i] = std::string(e.kind()) + ": " + e.what();
      spdlog::warn("rt60 item {} failed: {}", items[i].id, errors[i]);
    }
  });

  nlohmann::json per_sample = nlohmann::json::array(), failures = nlohmann::json::array();
  std::vector<double> errs;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!rows[i]) {
      failures.push_back({{"id", items[i].id}, {"error", errors[i]}});
      continue;
    }
    const auto &r = *rows[i];
    errs.push_back(r.err);
    per_sample.push_back({{"id", items[i].id},
                          {"rt60_est", r.est},
                          {"rt60_gt", r.gt},
                          {"error_pct", r.err},
                          {"method", r.method},
                          {"gt_method", r.gt_method}});
  }
  nlohmann::json out{{"run_id", run_id},
                     {"common_rate_hz", options.common_rate},
                     {"generator", generator.name()},
                     {"seed", options.seed},
                     {"ground_truth", "measured from the ground-truth RIR with the same estimator"},
                     {"per_sample", per_sample},
                     {"n", errs.size()},
                     {"n_failed", failures.size()},
                     {"failures", failures},
                     {"mean_error_pct", nullptr},
                     {"median_error_pct", nullptr}};
  if (!errs.empty()) {
    const auto agg = acoustics::aggregate_errors(errs);
    out["mean_error_pct"] = agg.mean_error_pct;
    out["median_error_pct"] = agg.median_error_pct;
  }
  return out;
}

EmbedPairs read_embed_pairs(const std::filesystem::path &path) {
  EmbedPairs p;
  std::size_t line = 0;
  for (const auto &j : read_jsonl(path)) {
    ++line;
    const std::string id = j.value("id", "row" + std::to_string(line));
    const std::string ref = get_string(j, "reference", path);
    const bool has_raw = j.contains("raw"), has_refined = j.contains("refined");
    if (has_raw && has_refined) {
      p.raw.push_back({id, get_string(j, "raw", path), ref});
      p.refined.push_back({id, get_string(j, "refined", path), ref});
    } else if (j.contains("candidate")) {
      p.single.push_back({id, get_string(j, "candidate", path), ref});
    } else if (has_raw || has_refined) {
      p.single.push_back({id, get_string(j, has_raw ? "raw" : "refined", path), ref});
    } else {
      throw ParseError(path.string() + ":" + std::to_string(line) +
                       ": row needs raw+refined or candidate");
    }
  }
  if (!p.single.empty() && !p.raw.empty())
    throw ParseError(path.string() + ": mixes comparison rows and single-condition rows");
  return p;
}

nlohmann::json eval_embed(const EmbedPairs &pairs, embedding::EmbeddingEndpoint &endpoint,
                          std::size_t jobs) {
  if (!pairs.raw.empty())
    return embedding::to_json(embedding::compare_conditions(pairs.raw, pairs.refined, endpoint, jobs));
  const auto r = embedding::similarity_report(pairs.single, endpoint, "candidate", jobs);
  return {{"rows", {embedding::to_json(r)}},
          {"metadata", {{"endpoint", endpoint.name()}, {"pooling", endpoint.pooling()}, {"metric", "cosine"}}}};
}

std::vector<speech::SpeechItem> read_speech_manifest(
    const std::filesystem::path &path, const std::map<std::string, std::string> &transcripts) {
  const auto base = path.parent_path();
  std::vector<speech::SpeechItem> items;
  for (const auto &j : read_jsonl(path)) {
    speech::SpeechItem it;
    it.id = get_string(j, "id", path);
    it.clean = resolve_path(base, get_string(j, "clean", path));
    it.gt_rir = resolve_path(base, get_string(j, "gt_rir", path));
    it.generated_rir = resolve_path(base, get_string(j, "generated_rir", path));
    if (j.contains("transcript") && j["transcript"].is_string()) {
      it.transcript = j["transcript"].get<std::string>();
    } else if (auto t = transcripts.find(it.id); t != transcripts.end()) {
      it.transcript = t->second;
    } else {
      throw ValidationError("no reference transcript for item " + it.id, {it.id});
    }
    items.push_back(std::move(it));
  }
  return items;
}

void load_pesq(const std::filesystem::path &path, speech::SpeechReport &report) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (trim(line).empty()) continue;
    std::istringstream fields(line);
    std::string id;
    double gt = 0.0, gen = 0.0;
    if (!std::getline(fields, id, '\t') || !(fields >> gt >> gen))
      throw ParseError(path.string() + ":" + std::to_string(n) + ": expected id, pesq_gt, pesq_generated");
    report.pesq_gt[id] = gt;
    report.pesq_generated[id] = gen;
  }
}

}  // namespace rirbench::pipeline
