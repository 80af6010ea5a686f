// src/speech/asr.cpp

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

#include <fstream>

#include "rirbench/speech.hpp"
#include "rirbench/util.hpp"
#include "rirbench/wav.hpp"

namespace rirbench::speech {

std::string EchoAsrEndpoint::transcribe(const AsrRequest &request) {
  auto it = transcripts_.find(request.utterance_id);
  if (it == transcripts_.end())
    throw TransportError("mock-echo: no transcript for '" + request.utterance_id + "'");
  return it->second;
}

ReplayAsrEndpoint::ReplayAsrEndpoint(const std::filesystem::path &tsv) {
  std::ifstream in(tsv);
  if (!in) throw IoError("cannot open replay file " + tsv.string());
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto t1 = line.find('\t');
    if (t1 == std::string::npos)
      throw ParseError(tsv.string() + ":" + std::to_string(lineno) + ": expected tab-separated fields");
    const auto t2 = line.find('\t', t1 + 1);
    const std::string id = line.substr(0, t1);
    if (t2 == std::string::npos)
      entries_[{id, ""}] = line.substr(t1 + 1);
    else
      entries_[{id, line.substr(t1 + 1, t2 - t1 - 1)}] = line.substr(t2 + 1);
  }
}

std::string ReplayAsrEndpoint::transcribe(const AsrRequest &request) {
  auto it = entries_.find({request.utterance_id, request.condition});
  if (it == entries_.end()) it = entries_.find({request.utterance_id, ""});
  if (it == entries_.end())
    throw TransportError("replay: no hypothesis for '" + request.utterance_id + "' (" +
                         request.condition + ")");
  return it->second;
}

std::string HttpAsrEndpoint::transcribe(const AsrRequest &request) {
  if (!request.audio) throw PreconditionError("ASR request without audio");
  const auto bytes = audio::encode_wav(*request.audio, audio::WavFormat::kFloat32);
  std::map<std::string, std::string> headers{{"X-Utterance-Id", request.utterance_id},
                                             {"X-Condition", request.condition}};
  if (!api_key_.empty()) headers["Authorization"] = "Bearer " + api_key_;
  const auto res = http::post(url_, std::string(bytes.begin(), bytes.end()), "audio/wav", headers,
                              timeout_);
  try {
    return nlohmann::json::parse(res.body).at("text").get<std::string>();
  } catch (const nlohmann::json::exception &e) {
    throw ContentError(url_ + ": malformed ASR response: " + e.what());
  }
}

std::string RetryingAsrEndpoint::transcribe(const AsrRequest &request) {
  return with_retry(policy_, name(), [&] { return inner_->transcribe(request); });
}

std::shared_ptr<AsrEndpoint> make_asr_endpoint(const std::string &spec,
                                               const std::map<std::string, std::string> &references,
                                               const std::string &api_key, const RetryPolicy &retry) {
  if (spec == "mock") return std::make_shared<EchoAsrEndpoint>(references);
  if (spec.rfind("replay:", 0) == 0) return std::make_shared<ReplayAsrEndpoint>(spec.substr(7));
  if (spec.rfind("http://", 0) == 0 || spec.rfind("https://", 0) == 0)
    return std::make_shared<RetryingAsrEndpoint>(std::make_shared<HttpAsrEndpoint>(spec, api_key),
                                                 retry);
  throw PreconditionError("ASR endpoint must be 'mock', 'replay:<tsv>' or an http(s) URL, got '" +
                          spec + "'");
}

std::map<std::string, std::string> load_transcripts(const std::filesystem::path &path) {
  std::map<std::string, std::string> out;
  if (std::filesystem::is_directory(path)) {
    for (const auto &e : std::filesystem::directory_iterator(path))
      if (e.path().extension() == ".txt") out[e.path().stem().string()] = trim(read_text_file(e.path()));
    return out;
  }
  std::ifstream in(path);
  if (!in) throw IoError("cannot open transcripts " + path.string());
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected 'id<TAB>text'");
    out[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return out;
}

}  // namespace rirbench::speech
