// src/labeling/labeling.cpp

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

#include "rirbench/labeling.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>

#include "prompt_defaults.hpp"
#include "rirbench/util.hpp"

namespace rirbench::labeling {

namespace {

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

std::string require_text(std::string reply, const std::string &who) {
  reply = trim(reply);
  if (reply.empty()) throw ContentError(who + " returned an empty response");
  return reply;
}

ChatRequest single_turn(std::string system, std::string text,
                        std::optional<std::string> image = std::nullopt) {
  ChatRequest r;
  r.system = std::move(system);
  r.messages.push_back(ChatMessage{"user", std::move(text), std::move(image)});
  return r;
}

std::string metadata_block(const nlohmann::json &metadata) { return metadata.dump(2); }

void require_metadata(const nlohmann::json &metadata) {
  if (!metadata.is_object() || metadata.empty())
    throw PreconditionError("room metadata is empty");
}

}  // namespace

std::string to_string(RecordStatus s) {
  switch (s) {
    case RecordStatus::kPending: return "pending";
    case RecordStatus::kFilteredOut: return "filtered_out";
    case RecordStatus::kLabeled: return "labeled";
  }
  return "pending";
}

RecordStatus parse_status(const std::string &s) {
  if (s == "pending") return RecordStatus::kPending;
  if (s == "filtered_out") return RecordStatus::kFilteredOut;
  if (s == "labeled") return RecordStatus::kLabeled;
  throw ParseError("unknown record status '" + s + "'");
}

DatasetRecord record_from_json(const nlohmann::json &j) {
  if (!j.is_object()) throw ParseError("manifest record must be a JSON object");
  DatasetRecord r;
  try {
    r.id = j.at("id").get<std::string>();
    r.room_id = j.value("room_id", std::string());
    r.rir_path = j.value("rir_path", std::string());
    r.image_ref = j.value("image_ref", std::string());
    if (j.contains("metadata") && !j["metadata"].is_null()) r.metadata = j["metadata"];
    for (const auto &c : j.value("captions", nlohmann::json::array()))
      r.captions.push_back({c.at("model_name").get<std::string>(),
                            c.at("caption").get<std::string>(), c.at("score").get<int>()});
    if (j.contains("final_prompt") && j["final_prompt"].is_string())
      r.final_prompt = j["final_prompt"].get<std::string>();
    r.status = parse_status(j.value("status", std::string("pending")));
    if (j.contains("error") && j["error"].is_string()) r.error = j["error"].get<std::string>();
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("bad manifest record: ") + e.what());
  }
  static const std::set<std::string> kKnown = {"id",       "room_id",      "rir_path",
                                               "image_ref", "metadata",    "captions",
                                               "final_prompt", "status",   "error"};
  for (const auto &[k, v] : j.items())
    if (!kKnown.count(k)) r.extra[k] = v;
  if (r.status == RecordStatus::kLabeled && !r.final_prompt)
    throw ParseError("record " + r.id + " is labeled but has no final_prompt");
  return r;
}

nlohmann::json to_json(const DatasetRecord &r) {
  nlohmann::json j = r.extra;
  j["id"] = r.id;
  j["room_id"] = r.room_id;
  j["rir_path"] = r.rir_path;
  j["image_ref"] = r.image_ref;
  j["metadata"] = r.metadata;
  j["captions"] = nlohmann::json::array();
  for (const auto &c : r.captions)
    j["captions"].push_back({{"model_name", c.model_name}, {"caption", c.caption}, {"score", c.score}});
  j["final_prompt"] = r.final_prompt ? nlohmann::json(*r.final_prompt) : nlohmann::json(nullptr);
  j["status"] = to_string(r.status);
  if (r.error) j["error"] = *r.error;
  return j;
}

std::vector<DatasetRecord> read_manifest(const std::filesystem::path &path) {
  std::vector<DatasetRecord> out;
  for (const auto &row : read_jsonl(path)) out.push_back(record_from_json(row));
  return out;
}

void write_manifest(const std::filesystem::path &path, const std::vector<DatasetRecord> &records) {
  std::vector<nlohmann::json> rows;
  rows.reserve(records.size());
  for (const auto &r : records) rows.push_back(to_json(r));
  write_jsonl(path, rows);
}

std::vector<IclExample> load_icl_examples(const std::filesystem::path &path) {
  const std::string text = read_text_file(path);
  std::vector<nlohmann::json> rows;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    for (const auto &e : nlohmann::json::parse(text)) rows.push_back(e);
  } else {
    rows = read_jsonl(path);
  }
  std::vector<IclExample> out;
  for (const auto &e : rows) {
    IclExample ex{e.at("raw_caption").get<std::string>(), e.at("refined_prompt").get<std::string>()};
    if (trim(ex.raw_caption).empty() || trim(ex.refined_prompt).empty())
      throw ParseError("ICL example with empty caption or prompt in " + path.string());
    out.push_back(std::move(ex));
  }
  return out;
}

PromptTemplates PromptTemplates::defaults() {
  return PromptTemplates{trim(prompt_defaults::kAcoustician), trim(prompt_defaults::kCaptionRequest),
                         trim(prompt_defaults::kJudge),       trim(prompt_defaults::kJudgeStrict),
                         trim(prompt_defaults::kFusion),      trim(prompt_defaults::kIclRefine)};
}

PromptTemplates PromptTemplates::load(const std::filesystem::path &dir) {
  PromptTemplates t = defaults();
  auto load_one = [&](const char *name, std::string &slot) {
    const auto p = dir / (std::string(name) + ".txt");
    if (std::filesystem::exists(p)) slot = trim(read_text_file(p));
  };
  load_one("acoustician", t.acoustician);
  load_one("caption_request", t.caption_request);
  load_one("judge", t.judge);
  load_one("judge_strict", t.judge_strict);
  load_one("fusion", t.fusion);
  load_one("icl_refine", t.icl_refine);
  return t;
}

std::string caption_image(ChatEndpoint &endpoint, const std::string &image_ref,
                          const std::string &acoustician_system_prompt,
                          const std::string &caption_request) {
  if (image_ref.empty()) throw PreconditionError("record has no image_ref");
  return require_text(
      endpoint.complete(single_turn(acoustician_system_prompt, caption_request, image_ref)),
      endpoint.name());
}

std::optional<int> parse_score(const std::string &reply) {
  const std::size_t n = reply.size();
  for (std::size_t i = 0; i < n;) {
    if (!is_digit(reply[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && is_digit(reply[j])) ++j;
    const bool left_ok =
        i == 0 || (!is_alnum(reply[i - 1]) && !(reply[i - 1] == '.' && i >= 2 && is_digit(reply[i - 2])));
    const bool right_ok =
        j == n || (!is_alnum(reply[j]) && !(reply[j] == '.' && j + 1 < n && is_digit(reply[j + 1])));
    if (left_ok && right_ok && j - i == 1) {
      const int v = reply[i] - '0';
      if (v >= 1 && v <= 5) return v;
    }
    i = j;
  }
  return std::nullopt;
}

CaptionScore judge_caption(ChatEndpoint &judge, const std::string &model_name,
                           const std::string &caption, const nlohmann::json &metadata,
                           const PromptTemplates &templates) {
  require_metadata(metadata);
  const std::string user =
      "Caption:\n" + caption + "\n\nGround-truth room metadata (JSON):\n" + metadata_block(metadata);
  std::string reply = judge.complete(single_turn(templates.judge, user));
  auto score = parse_score(reply);
  if (!score) {
    reply = judge.complete(single_turn(templates.judge + "\n\n" + templates.judge_strict, user));
    score = parse_score(reply);
  }
  if (!score)
    throw ScoreParseError(judge.name() + ": no score in 1..5 after re-ask: '" + reply + "'", reply);
  return CaptionScore{model_name, caption, *score};
}

bool filter_record(std::span<const int> scores) {
  const auto good = std::count_if(scores.begin(), scores.end(),
                                  [](int s) { return s > kKeepScoreAbove; });
  return static_cast<std::size_t>(good) >= kMinGoodCaptions;
}

bool filter_record(std::span<const CaptionScore> scores) {
  std::vector<int> s;
  for (const auto &c : scores) s.push_back(c.score);
  return filter_record(std::span<const int>(s));
}

const CaptionScore &select_best_caption(std::span<const CaptionScore> scores) {
  if (scores.empty()) throw PreconditionError("no captions to select from");
  const CaptionScore *best = &scores.front();
  for (const auto &c : scores.subspan(1)) {
    if (c.score > best->score || (c.score == best->score && c.model_name < best->model_name))
      best = &c;
  }
  return *best;
}

std::string fuse_prompt(ChatEndpoint &fuser, const std::string &best_caption,
                        const nlohmann::json &metadata, const PromptTemplates &templates) {
  require_metadata(metadata);
  const std::string user =
      "Caption:\n" + best_caption + "\n\nRoom metadata (JSON):\n" + metadata_block(metadata);
  return require_text(fuser.complete(single_turn(templates.fusion, user)), fuser.name());
}

std::string format_icl_request(std::span<const IclExample> examples,
                               const std::string &intermediate_caption) {
  std::string s;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    s += "Example " + std::to_string(i + 1) + "\nRaw caption: " + examples[i].raw_caption +
         "\nRefined prompt: " + examples[i].refined_prompt + "\n\n";
  }
  s += "Raw caption: " + intermediate_caption + "\nRefined prompt:";
  return s;
}

IclRefinement refine_prompt_icl(ChatEndpoint &endpoint, const std::string &free_form_text,
                                std::span<const IclExample> examples,
                                const PromptTemplates &templates) {
  if (examples.size() != kIclExampleCount)
    throw PreconditionError("ICL refinement needs exactly " + std::to_string(kIclExampleCount) +
                            " examples, got " + std::to_string(examples.size()));
  if (trim(free_form_text).empty()) throw PreconditionError("free-form text is empty");
  IclRefinement out;
  out.intermediate_caption = require_text(
      endpoint.complete(single_turn(templates.acoustician, free_form_text)), endpoint.name());
  spdlog::info("icl stage 1 ({}): {}", endpoint.name(), out.intermediate_caption);
  out.standardized_prompt = require_text(
      endpoint.complete(single_turn(templates.icl_refine,
                                    format_icl_request(examples, out.intermediate_caption))),
      endpoint.name());
  spdlog::info("icl stage 2 ({}): {}", endpoint.name(), out.standardized_prompt);
  return out;
}

nlohmann::json to_json(const LabelingStats &s) {
  nlohmann::json j{{"total", s.total}, {"kept", s.kept}, {"dropped", s.dropped},
                   {"pending", s.pending}};
  j["per_model_mean_score"] = nlohmann::json::object();
  for (const auto &[m, v] : s.per_model_mean_score) j["per_model_mean_score"][m] = v;
  j["per_model_judged"] = nlohmann::json::object();
  for (const auto &[m, v] : s.per_model_judged) j["per_model_judged"][m] = v;
  return j;
}

LabelingStats compute_stats(std::span<const DatasetRecord> records) {
  LabelingStats s;
  std::map<std::string, double> sums;
  for (const auto &r : records) {
    ++s.total;
    switch (r.status) {
      case RecordStatus::kLabeled: ++s.kept; break;
      case RecordStatus::kFilteredOut: ++s.dropped; break;
      case RecordStatus::kPending: ++s.pending; break;
    }
    if (r.status == RecordStatus::kPending) continue;
    for (const auto &c : r.captions) {
      sums[c.model_name] += c.score;
      ++s.per_model_judged[c.model_name];
    }
  }
  for (const auto &[m, total] : sums)
    s.per_model_mean_score[m] = total / static_cast<double>(s.per_model_judged[m]);
  return s;
}

LabelingResult run_labeling(std::vector<DatasetRecord> records, const LabelingEndpoints &endpoints,
                            const PromptTemplates &templates, std::size_t parallelism) {
  if (endpoints.captioners.size() < 2)
    throw PreconditionError("labeling needs at least two captioners");
  if (!endpoints.judge || !endpoints.fuser)
    throw PreconditionError("labeling needs a judge and a fuser endpoint");

  // Each worker owns exactly one slot; the caller assembles the output.
  std::vector<DatasetRecord> out(records.size());
  parallel_for(records.size(), parallelism, [&](std::size_t i) {
    DatasetRecord r = records[i];
    if (r.status != RecordStatus::kPending) {
      out[i] = std::move(r);
      return;
    }
    try {
      require_metadata(r.metadata);
      std::vector<CaptionScore> scored;
      for (const auto &cap : endpoints.captioners) {
        const auto caption = caption_image(*cap, r.image_ref, templates.acoustician,
                                           templates.caption_request);
        scored.push_back(judge_caption(*endpoints.judge, cap->name(), caption, r.metadata, templates));
      }
      r.captions = scored;
      r.error.reset();
      if (filter_record(std::span<const CaptionScore>(scored))) {
        r.final_prompt = fuse_prompt(*endpoints.fuser, select_best_caption(scored).caption,
                                     r.metadata, templates);
        r.status = RecordStatus::kLabeled;
      } else {
        r.final_prompt.reset();
        r.status = RecordStatus::kFilteredOut;
      }
    } catch (const Error &e) {
      r = records[i];
      r.status = RecordStatus::kPending;
      r.error = std::string(e.kind()) + ": " + e.what();
      spdlog::warn("record {} left pending: {}", r.id, *r.error);
    }
    out[i] = std::move(r);
  });

  LabelingResult result;
  result.stats = compute_stats(out);
  result.records = std::move(out);
  return result;
}

RoomSplit split_room_disjoint(std::span<const DatasetRecord> records,
                              const std::set<std::string> &test_rooms) {
  RoomSplit split;
  for (const auto &r : records) {
    if (r.room_id.empty()) throw PreconditionError("record " + r.id + " has no room_id");
    (test_rooms.count(r.room_id) ? split.test : split.train).push_back(r);
  }
  return split;
}

}  // namespace rirbench::labeling
