// include/rirbench/generator.hpp

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

#ifndef RIRBENCH_GENERATOR_HPP_
#define RIRBENCH_GENERATOR_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "json.hpp"
#include "rirbench/audio.hpp"
#include "rirbench/room.hpp"

namespace rirbench::room {

struct GenerateRequest {
  std::string prompt;
  std::optional<std::uint64_t> seed;
  int sample_rate = 16000;
};

struct GeneratedRir {
  audio::ImpulseResponse rir;
  nlohmann::json metadata;
};

/// Anything that turns a text prompt into an RIR: the in-process ISM
/// baseline, or a remote model behind HTTP.
class GeneratorEndpoint {
 public:
  virtual ~GeneratorEndpoint() = default;
  virtual GeneratedRir generate(const GenerateRequest &request) = 0;
  virtual std::string name() const = 0;
  /// False when generate() must not be called concurrently.
  virtual bool concurrent_safe() const { return true; }
};

/// Absorption adjectives understood by the baseline prompt grammar.
double absorption_for_class(const std::string &adjective);

struct StructuredPrompt {
  Vec3 dims{};
  double alpha = 0.25;
  std::string absorption_class = "moderate";
  bool absorption_defaulted = false;
  std::optional<Vec3> source;
  std::optional<Vec3> receiver;
};

inline constexpr const char *kPromptGrammar =
    "expected: 'room <L> by <W> by <H> meters[, <very absorptive|absorptive|moderate|"
    "reflective|very reflective> absorption][, source at (x, y, z)][, receiver at (x, y, z)]'"
    " (also accepted: '<L>x<W>x<H> m', 'alpha <0..1>')";

/// Throws ParseError carrying kPromptGrammar when no dimensions are found.
StructuredPrompt parse_structured_prompt(const std::string &prompt);

/// Builds the baseline room: source at 1/3 and receiver at 2/3 of each
/// dimension unless given, max_time = 3 * Sabine RT60.
ShoeboxRoom room_from_prompt(const StructuredPrompt &p);

class IsmBaselineGenerator : public GeneratorEndpoint {
 public:
  GeneratedRir generate(const GenerateRequest &request) override;
  std::string name() const override { return "ism-baseline"; }
};

/// POST {prompt, seed?, sample_rate} -> WAV body, metadata JSON in the
/// X-Rir-Metadata response header.
class HttpGenerator : public GeneratorEndpoint {
 public:
  explicit HttpGenerator(std::string url, double timeout_seconds = 600.0)
      : url_(std::move(url)), timeout_(timeout_seconds) {}
  GeneratedRir generate(const GenerateRequest &request) override;
  std::string name() const override { return url_; }

 private:
  std::string url_;
  double timeout_;
};

/// "ism" or an http(s) URL.
std::unique_ptr<GeneratorEndpoint> make_generator(const std::string &spec);

inline constexpr const char *kMetadataHeader = "X-Rir-Metadata";

/// Serves any GeneratorEndpoint at POST /generate.
class GeneratorServer {
 public:
  explicit GeneratorServer(std::shared_ptr<GeneratorEndpoint> generator);
  ~GeneratorServer();
  GeneratorServer(const GeneratorServer &) = delete;
  GeneratorServer &operator=(const GeneratorServer &) = delete;

  /// Binds (port 0 picks a free port) and serves on a background thread.
  int start(const std::string &host, int port);
  /// Binds and serves on the calling thread until stop().
  void listen(const std::string &host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace rirbench::room

#endif  // RIRBENCH_GENERATOR_HPP_
