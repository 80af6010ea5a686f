// include/rirbench/speech.hpp

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

#ifndef RIRBENCH_SPEECH_HPP_
#define RIRBENCH_SPEECH_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "rirbench/audio.hpp"
#include "rirbench/endpoint.hpp"

namespace rirbench::speech {

// ---------------------------------------------------------------- WER

/// Lowercase, drop punctuation other than apostrophes, collapse whitespace.
std::string normalize_transcript(const std::string &text);
std::vector<std::string> tokenize_transcript(const std::string &text);

struct WerResult {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t reference_length = 0;
  double wer = 0.0;  // (S + D + I) / N
  std::size_t errors() const { return substitutions + deletions + insertions; }
};

/// Unit-cost alignment. Among optimal alignments the backtrace prefers
/// substitution (or match), then insertion, then deletion.
WerResult wer(std::span<const std::string> reference, std::span<const std::string> hypothesis);
/// Normalizes and tokenizes both sides first.
WerResult wer(const std::string &reference, const std::string &hypothesis);

/// Pooled (sum of errors over sum of reference words).
double corpus_wer(std::span<const WerResult> results);

// ---------------------------------------------------------------- STOI

inline constexpr int kStoiRate = 10000;
inline constexpr std::size_t kStoiFrame = 256;
inline constexpr std::size_t kStoiFft = 512;
inline constexpr std::size_t kStoiBands = 15;
inline constexpr double kStoiMinFreq = 150.0;
inline constexpr std::size_t kStoiSegment = 30;
inline constexpr double kStoiBeta = -15.0;
inline constexpr double kStoiDynRange = 40.0;

/// Classic STOI. Multichannel input is averaged to mono, both signals are
/// resampled to 10 kHz, and degraded is cut or zero-padded to clean's length.
double stoi(const audio::AudioBuffer &clean, const audio::AudioBuffer &degraded);
/// Same on raw 10 kHz samples of equal length.
double stoi_10k(std::span<const double> clean, std::span<const double> degraded);

// ---------------------------------------------------------------- Wilcoxon

enum class ZeroMethod { kWilcoxDropZeros, kPratt };
std::string to_string(ZeroMethod m);

inline constexpr std::size_t kWilcoxonMinPairs = 5;
inline constexpr std::size_t kWilcoxonExactMax = 12;

struct PairedStats {
  std::size_t n = 0;         // pairs supplied
  std::size_t n_zero = 0;    // zero differences
  double statistic = 0.0;    // min(W+, W-)
  double p_value = 1.0;      // two-sided
  ZeroMethod method = ZeroMethod::kPratt;
  bool exact = false;
  std::optional<double> z;   // set for the normal approximation
};

nlohmann::json to_json(const PairedStats &s);

/// Two-sided signed-rank test on d = x - y. Exact sign-flip enumeration
/// when the nonzero count is at most kWilcoxonExactMax, otherwise the
/// normal approximation with tie and continuity correction.
PairedStats wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y,
                                 ZeroMethod method);
/// Forces the normal approximation regardless of n.
PairedStats wilcoxon_signed_rank_approx(std::span<const double> x, std::span<const double> y,
                                        ZeroMethod method);

// ---------------------------------------------------------------- ASR

struct AsrRequest {
  std::string utterance_id;
  std::string condition;
  const audio::AudioBuffer *audio = nullptr;
};

class AsrEndpoint {
 public:
  virtual ~AsrEndpoint() = default;
  virtual std::string transcribe(const AsrRequest &request) = 0;
  virtual std::string name() const = 0;
};

/// Returns the reference transcript of the utterance.
class EchoAsrEndpoint : public AsrEndpoint {
 public:
  explicit EchoAsrEndpoint(std::map<std::string, std::string> transcripts)
      : transcripts_(std::move(transcripts)) {}
  std::string transcribe(const AsrRequest &request) override;
  std::string name() const override { return "mock-echo"; }

 private:
  std::map<std::string, std::string> transcripts_;
};

/// Replays recorded hypotheses from a TSV of "id<TAB>condition<TAB>text"
/// or "id<TAB>text" (same text for every condition).
class ReplayAsrEndpoint : public AsrEndpoint {
 public:
  explicit ReplayAsrEndpoint(const std::filesystem::path &tsv);
  std::string transcribe(const AsrRequest &request) override;
  std::string name() const override { return "replay"; }

 private:
  std::map<std::pair<std::string, std::string>, std::string> entries_;
};

/// POST audio/wav (float32) -> {text}. Utterance id and condition travel in
/// X-Utterance-Id and X-Condition headers.
class HttpAsrEndpoint : public AsrEndpoint {
 public:
  HttpAsrEndpoint(std::string url, std::string api_key = "", double timeout_seconds = 300.0)
      : url_(std::move(url)), api_key_(std::move(api_key)), timeout_(timeout_seconds) {}
  std::string transcribe(const AsrRequest &request) override;
  std::string name() const override { return url_; }

 private:
  std::string url_, api_key_;
  double timeout_;
};

class RetryingAsrEndpoint : public AsrEndpoint {
 public:
  RetryingAsrEndpoint(std::shared_ptr<AsrEndpoint> inner, RetryPolicy policy)
      : inner_(std::move(inner)), policy_(policy) {}
  std::string transcribe(const AsrRequest &request) override;
  std::string name() const override { return inner_->name(); }

 private:
  std::shared_ptr<AsrEndpoint> inner_;
  RetryPolicy policy_;
};

/// "mock" (echo of `references`), "replay:<tsv>" or "http(s)://...".
std::shared_ptr<AsrEndpoint> make_asr_endpoint(const std::string &spec,
                                               const std::map<std::string, std::string> &references,
                                               const std::string &api_key, const RetryPolicy &retry);

/// Transcripts as a TSV "id<TAB>text" file or a directory of <id>.txt files.
std::map<std::string, std::string> load_transcripts(const std::filesystem::path &path);

// ---------------------------------------------------------------- report

struct SpeechItem {
  std::string id;
  std::filesystem::path clean;
  std::filesystem::path gt_rir;
  std::filesystem::path generated_rir;
  std::string transcript;
};

struct ConditionMetrics {
  std::string id;
  double wer_gt = 0.0, wer_generated = 0.0;
  double stoi_gt = 0.0, stoi_generated = 0.0;
  std::size_t reference_words = 0;
  std::size_t errors_gt = 0, errors_generated = 0;
};

struct SpeechReport {
  std::vector<ConditionMetrics> items;
  std::vector<std::pair<std::string, std::string>> failures;  // (id, message)
  std::map<std::string, double> pesq_gt, pesq_generated;      // externally supplied
  std::string asr;
};

/// Convolves each clean utterance with both RIRs (RIRs are resampled to the
/// speech rate), transcribes, and scores. Failing items are recorded and
/// excluded.
SpeechReport speech_report(std::span<const SpeechItem> items, AsrEndpoint &asr,
                           std::size_t jobs = 4);

/// Table-shaped JSON: per-condition WER (percent; mean, median, corpus),
/// nullable PESQ, STOI mean and median, plus paired WER statistics.
nlohmann::json to_json(const SpeechReport &r);

}  // namespace rirbench::speech

#endif  // RIRBENCH_SPEECH_HPP_
