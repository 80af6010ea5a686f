// include/rirbench/labeling.hpp

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

#ifndef RIRBENCH_LABELING_HPP_
#define RIRBENCH_LABELING_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "rirbench/chat.hpp"

namespace rirbench::labeling {

struct CaptionScore {
  std::string model_name;
  std::string caption;
  int score = 0;  // 1..5
};

enum class RecordStatus { kPending, kFilteredOut, kLabeled };
std::string to_string(RecordStatus s);
RecordStatus parse_status(const std::string &s);

/// One image-RIR sample moving through the labeling pipeline; one JSONL line
/// of a manifest. Unknown fields are carried through untouched.
struct DatasetRecord {
  std::string id;
  std::string room_id;
  std::string rir_path;
  std::string image_ref;
  nlohmann::json metadata = nlohmann::json::object();
  std::vector<CaptionScore> captions;
  std::optional<std::string> final_prompt;
  RecordStatus status = RecordStatus::kPending;
  std::optional<std::string> error;
  nlohmann::json extra = nlohmann::json::object();
};

DatasetRecord record_from_json(const nlohmann::json &j);
nlohmann::json to_json(const DatasetRecord &r);
std::vector<DatasetRecord> read_manifest(const std::filesystem::path &path);
void write_manifest(const std::filesystem::path &path, const std::vector<DatasetRecord> &records);

struct IclExample {
  std::string raw_caption;
  std::string refined_prompt;
};

/// JSON array or JSONL of {raw_caption, refined_prompt}.
std::vector<IclExample> load_icl_examples(const std::filesystem::path &path);

/// System prompts and fixed instructions. Defaults mirror prompts/*.txt.
struct PromptTemplates {
  std::string acoustician;
  std::string caption_request;
  std::string judge;
  std::string judge_strict;
  std::string fusion;
  std::string icl_refine;

  static PromptTemplates defaults();
  /// Loads any of <name>.txt present in dir over the defaults.
  static PromptTemplates load(const std::filesystem::path &dir);
};

std::string caption_image(ChatEndpoint &endpoint, const std::string &image_ref,
                          const std::string &acoustician_system_prompt,
                          const std::string &caption_request =
                              PromptTemplates::defaults().caption_request);

/// First standalone integer token with value in 1..5.
std::optional<int> parse_score(const std::string &reply);

/// Asks the judge to rate `caption` against metadata; re-asks once with the
/// strict instruction when the reply has no score.
CaptionScore judge_caption(ChatEndpoint &judge, const std::string &model_name,
                           const std::string &caption, const nlohmann::json &metadata,
                           const PromptTemplates &templates);

inline constexpr int kKeepScoreAbove = 3;
inline constexpr std::size_t kMinGoodCaptions = 2;

/// Keep iff at least two captions score strictly above 3.
bool filter_record(std::span<const int> scores);
bool filter_record(std::span<const CaptionScore> scores);

/// Highest score; ties go to the lexicographically smallest model name.
const CaptionScore &select_best_caption(std::span<const CaptionScore> scores);

std::string fuse_prompt(ChatEndpoint &fuser, const std::string &best_caption,
                        const nlohmann::json &metadata, const PromptTemplates &templates);

struct IclRefinement {
  std::string intermediate_caption;
  std::string standardized_prompt;
};

inline constexpr std::size_t kIclExampleCount = 5;

/// Two exchanges: acoustic analysis of the free-form text, then translation
/// of that caption into the standardized format guided by five examples.
IclRefinement refine_prompt_icl(ChatEndpoint &endpoint, const std::string &free_form_text,
                                std::span<const IclExample> examples,
                                const PromptTemplates &templates);

/// The user message sent in the second refinement exchange.
std::string format_icl_request(std::span<const IclExample> examples,
                               const std::string &intermediate_caption);

struct LabelingEndpoints {
  std::vector<std::shared_ptr<ChatEndpoint>> captioners;
  std::shared_ptr<ChatEndpoint> judge;
  std::shared_ptr<ChatEndpoint> fuser;
};

struct LabelingStats {
  std::size_t total = 0, kept = 0, dropped = 0, pending = 0;
  std::map<std::string, double> per_model_mean_score;
  std::map<std::string, std::size_t> per_model_judged;
};

nlohmann::json to_json(const LabelingStats &s);

struct LabelingResult {
  std::vector<DatasetRecord> records;
  LabelingStats stats;
};

/// Caption with every captioner, judge, filter, fuse survivors. Records not
/// pending pass through unchanged; a failing record stays pending with an
/// error note. At most `parallelism` records are in flight.
LabelingResult run_labeling(std::vector<DatasetRecord> records, const LabelingEndpoints &endpoints,
                            const PromptTemplates &templates, std::size_t parallelism = 4);

LabelingStats compute_stats(std::span<const DatasetRecord> records);

struct RoomSplit {
  std::vector<DatasetRecord> train;
  std::vector<DatasetRecord> test;
};

/// Records from rooms in test_rooms go to test, the rest to train; throws if
/// any record has no room_id.
RoomSplit split_room_disjoint(std::span<const DatasetRecord> records,
                              const std::set<std::string> &test_rooms);

}  // namespace rirbench::labeling

#endif  // RIRBENCH_LABELING_HPP_
