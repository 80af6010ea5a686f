// src/room/generator.cpp

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

#include "rirbench/generator.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

#include "rirbench/util.hpp"
#include "rirbench/wav.hpp"

namespace rirbench::room {

namespace {

struct AbsorptionClass {
  const char *name;
  double alpha;
};

// Longest names first so "very absorptive" wins over "absorptive".
constexpr AbsorptionClass kClasses[] = {
    {"very absorptive", 0.6}, {"very reflective", 0.05}, {"absorptive", 0.4},
    {"reflective", 0.1},      {"moderate", 0.25},
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

const std::string kNum = R"((\d+(?:\.\d+)?|\.\d+))";
const std::string kUnit = R"((?:\s*(?:m|meters?|metres?)\b)?)";
const std::string kBy = R"(\s*(?:by|x|\*)\s*)";

std::optional<Vec3> find_point(const std::string &text, const std::string &keywords) {
  const std::regex re("(?:" + keywords + R"()\s+(?:at|position|positioned at)?\s*\(?\s*)" +
                      kNum + R"(\s*,\s*)" + kNum + R"(\s*,\s*)" + kNum);
  std::smatch m;
  if (!std::regex_search(text, m, re)) return std::nullopt;
  return Vec3{std::stod(m[1]), std::stod(m[2]), std::stod(m[3])};
}

}  // namespace

double absorption_for_class(const std::string &adjective) {
  const auto key = lower(trim(adjective));
  for (const auto &c : kClasses)
    if (key == c.name) return c.alpha;
  throw PreconditionError("unknown absorption class '" + adjective + "'");
}

StructuredPrompt parse_structured_prompt(const std::string &prompt) {
  const std::string text = lower(prompt);
  StructuredPrompt p;

  const std::regex dims_re(kNum + kUnit + kBy + kNum + kUnit + kBy + kNum + kUnit);
  std::smatch m;
  if (!std::regex_search(text, m, dims_re))
    throw ParseError(std::string("no room dimensions in prompt '") + prompt + "'; " +
                     kPromptGrammar);
  p.dims = {std::stod(m[1]), std::stod(m[2]), std::stod(m[3])};

  const std::regex alpha_re(R"((?:alpha|absorption coefficient)\s*[=:]?\s*)" + kNum);
  if (std::regex_search(text, m, alpha_re)) {
    p.alpha = std::stod(m[1]);
    p.absorption_class = "explicit";
  } else {
    bool found = false;
    for (const auto &c : kClasses) {
      const std::regex word_re(std::string(R"(\b)") + c.name + R"(\b)");
      if (std::regex_search(text, word_re)) {
        p.alpha = c.alpha;
        p.absorption_class = c.name;
        found = true;
        break;
      }
    }
    p.absorption_defaulted = !found;
  }
  p.source = find_point(text, "source|speaker|loudspeaker");
  p.receiver = find_point(text, "receiver|microphone|mic|listener");
  return p;
}

ShoeboxRoom room_from_prompt(const StructuredPrompt &p) {
  ShoeboxRoom room = ShoeboxRoom::uniform(p.dims, p.alpha);
  if (p.source) room.source = *p.source;
  if (p.receiver) room.receiver = *p.receiver;
  room.max_time = 3.0 * sabine_rt60(room);
  room.validate();
  return room;
}

GeneratedRir IsmBaselineGenerator::generate(const GenerateRequest &request) {
  const auto parsed = parse_structured_prompt(request.prompt);
  const auto room = room_from_prompt(parsed);
  GeneratedRir out{simulate_shoebox(room, request.sample_rate), {}};
  out.metadata["generator"] = name();
  out.metadata["room"] = to_json(room);
  out.metadata["absorption_class"] = parsed.absorption_class;
  out.metadata["absorption_defaulted"] = parsed.absorption_defaulted;
  out.metadata["sabine_rt60"] = sabine_rt60(room);
  out.metadata["eyring_rt60"] = eyring_rt60(room);
  out.metadata["sample_rate"] = request.sample_rate;
  out.metadata["seed"] = request.seed ? nlohmann::json(*request.seed) : nlohmann::json(nullptr);
  return out;
}

GeneratedRir HttpGenerator::generate(const GenerateRequest &request) {
  nlohmann::json body{{"prompt", request.prompt}, {"sample_rate", request.sample_rate}};
  if (request.seed) body["seed"] = *request.seed;
  const auto res = http::post(url_, body.dump(), "application/json", {}, timeout_);
  GeneratedRir out;
  const auto *data = reinterpret_cast<const std::uint8_t *>(res.body.data());
  out.rir = audio::ImpulseResponse(audio::decode_wav({data, res.body.size()}));
  out.rir.validate();
  if (auto it = res.headers.find(kMetadataHeader); it != res.headers.end()) {
    try {
      out.metadata = nlohmann::json::parse(it->second);
    } catch (const nlohmann::json::exception &e) {
      throw ContentError(std::string("bad generator metadata header: ") + e.what());
    }
  }
  out.metadata["endpoint"] = url_;
  return out;
}

std::unique_ptr<GeneratorEndpoint> make_generator(const std::string &spec) {
  if (spec == "ism") return std::make_unique<IsmBaselineGenerator>();
  if (spec.rfind("http://", 0) == 0 || spec.rfind("https://", 0) == 0)
    return std::make_unique<HttpGenerator>(spec);
  throw PreconditionError("generator must be 'ism' or an http(s) URL, got '" + spec + "'");
}

}  // namespace rirbench::room
