// include/rirbench/pipeline.hpp

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

#ifndef RIRBENCH_PIPELINE_HPP_
#define RIRBENCH_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "rirbench/embedding.hpp"
#include "rirbench/generator.hpp"
#include "rirbench/speech.hpp"

namespace rirbench::pipeline {

/// Stable run identifier: hash of everything that determines the output.
std::string run_id(const nlohmann::json &inputs);

struct Rt60Item {
  std::string id;
  std::string prompt;
  std::filesystem::path gt_rir;
};

/// JSONL with {id, prompt, gt_rir}; paths resolve against the manifest.
std::vector<Rt60Item> read_rt60_manifest(const std::filesystem::path &path);

struct Rt60EvalOptions {
  int common_rate = 16000;
  std::uint64_t seed = 0;
  std::size_t jobs = 4;
};

/// Generates an RIR per prompt, resamples both sides to the common rate,
/// and reports signed RT60 percentage errors. Failing items are listed and
/// left out of the aggregates.
nlohmann::json eval_rt60(const std::vector<Rt60Item> &items, room::GeneratorEndpoint &generator,
                         const Rt60EvalOptions &options, const std::string &run_id);

/// JSONL of {id, reference, raw?, refined?, candidate?}. Rows with both raw
/// and refined feed a two-condition comparison; otherwise `candidate`
/// (or whichever of raw/refined is present) forms a single condition.
struct EmbedPairs {
  std::vector<embedding::TextPair> raw, refined, single;
};
EmbedPairs read_embed_pairs(const std::filesystem::path &path);

nlohmann::json eval_embed(const EmbedPairs &pairs, embedding::EmbeddingEndpoint &endpoint,
                          std::size_t jobs);

/// JSONL with {id, clean, gt_rir, generated_rir, transcript?}. Missing
/// transcripts are taken from `transcripts`.
std::vector<speech::SpeechItem> read_speech_manifest(
    const std::filesystem::path &path, const std::map<std::string, std::string> &transcripts);

/// TSV "id<TAB>pesq_gt<TAB>pesq_generated" of externally computed scores.
void load_pesq(const std::filesystem::path &path, speech::SpeechReport &report);

}  // namespace rirbench::pipeline

#endif  // RIRBENCH_PIPELINE_HPP_
