// src/speech/report.cpp

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

#include <spdlog/spdlog.h>

#include <algorithm>
#include <optional>

#include "rirbench/acoustics.hpp"
#include "rirbench/dsp.hpp"
#include "rirbench/speech.hpp"
#include "rirbench/util.hpp"
#include "rirbench/wav.hpp"

namespace rirbench::speech {

namespace {

audio::AudioBuffer reverberate(const audio::AudioBuffer &clean, const audio::ImpulseResponse &rir) {
  if (rir.sample_rate() == clean.sample_rate()) return audio::convolve(clean, rir);
  return audio::convolve(clean, audio::resample(rir, clean.sample_rate()));
}

nlohmann::json opt(const std::optional<double> &v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

std::optional<double> mean_of(const std::vector<double> &v) {
  if (v.empty()) return std::nullopt;
  return acoustics::mean(v);
}
std::optional<double> median_of(const std::vector<double> &v) {
  if (v.empty()) return std::nullopt;
  return acoustics::median(v);
}

}  // namespace

SpeechReport speech_report(std::span<const SpeechItem> items, AsrEndpoint &asr, std::size_t jobs) {
  std::vector<std::optional<ConditionMetrics>> rows(items.size());
  std::vector<std::string> errors(items.size());
  parallel_for(items.size(), jobs, [&](std::size_t i) {
    const auto &it = items[i];
    try {
      const auto clean = audio::read_wav(it.clean);
      const auto ref_tokens = tokenize_transcript(it.transcript);
      ConditionMetrics m;
      m.id = it.id;
      m.reference_words = ref_tokens.size();
      auto score = [&](const std::filesystem::path &rir_path, const char *condition, double &w,
                       double &s, std::size_t &errs) {
        const auto wet = reverberate(clean, audio::read_rir(rir_path));
        const auto hyp = tokenize_transcript(asr.transcribe({it.id, condition, &wet}));
        const auto r = wer(std::span<const std::string>(ref_tokens), std::span<const std::string>(hyp));
        w = r.wer;
        errs = r.errors();
        s = stoi(clean, wet);
      };
      score(it.gt_rir, "ground_truth", m.wer_gt, m.stoi_gt, m.errors_gt);
      score(it.generated_rir, "generated", m.wer_generated, m.stoi_generated, m.errors_generated);
      rows[i] = std::move(m);
    } catch (const Error &e) {
      errors[i] = std::string(e.kind()) + ": " + e.what();
      spdlog::warn("speech item {} failed: {}", it.id, errors[i]);
    }
  });
  SpeechReport r;
  r.asr = asr.name();
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (rows[i]) r.items.push_back(std::move(*rows[i]));
    else r.failures.emplace_back(items[i].id, errors[i]);
  }
  return r;
}

nlohmann::json to_json(const SpeechReport &r) {
  std::vector<double> wg, wn, sg, sn, pg, pn;
  std::size_t words = 0, eg = 0, en = 0;
  nlohmann::json per_item = nlohmann::json::array();
  for (const auto &m : r.items) {
    wg.push_back(100.0 * m.wer_gt);
    wn.push_back(100.0 * m.wer_generated);
    sg.push_back(m.stoi_gt);
    sn.push_back(m.stoi_generated);
    words += m.reference_words;
    eg += m.errors_gt;
    en += m.errors_generated;
    if (auto it = r.pesq_gt.find(m.id); it != r.pesq_gt.end()) pg.push_back(it->second);
    if (auto it = r.pesq_generated.find(m.id); it != r.pesq_generated.end()) pn.push_back(it->second);
    per_item.push_back({{"id", m.id},
                        {"wer_gt_pct", 100.0 * m.wer_gt},
                        {"wer_generated_pct", 100.0 * m.wer_generated},
                        {"stoi_gt", m.stoi_gt},
                        {"stoi_generated", m.stoi_generated},
                        {"reference_words", m.reference_words}});
  }
  auto corpus = [&](std::size_t errs) -> std::optional<double> {
    if (words == 0) return std::nullopt;
    return 100.0 * static_cast<double>(errs) / static_cast<double>(words);
  };
  auto row = [&](const char *name, const std::vector<double> &w, const std::vector<double> &s,
                 const std::vector<double> &p, std::size_t errs) {
    return nlohmann::json{{"condition", name},
                          {"n", w.size()},
                          {"wer_mean_pct", opt(mean_of(w))},
                          {"wer_median_pct", opt(median_of(w))},
                          {"wer_corpus_pct", opt(corpus(errs))},
                          {"pesq_mean", opt(mean_of(p))},
                          {"pesq_median", opt(median_of(p))},
                          {"stoi_mean", opt(mean_of(s))},
                          {"stoi_median", opt(median_of(s))}};
  };

  nlohmann::json stats{{"n", r.items.size()}, {"n_zero", nullptr}, {"pratt_p", nullptr},
                       {"wilcox_nonzero_p", nullptr}, {"alternative", "two-sided"},
                       {"paired_metric", "per-utterance WER, generated minus ground truth"}};
  std::vector<std::string> notes;
  if (r.items.size() >= kWilcoxonMinPairs) {
    const auto pratt = wilcoxon_signed_rank(wn, wg, ZeroMethod::kPratt);
    stats["pratt_p"] = pratt.p_value;
    stats["n_zero"] = pratt.n_zero;
    stats["pratt"] = to_json(pratt);
    try {
      const auto wil = wilcoxon_signed_rank(wn, wg, ZeroMethod::kWilcoxDropZeros);
      stats["wilcox_nonzero_p"] = wil.p_value;
      stats["wilcox_nonzero"] = to_json(wil);
    } catch (const PreconditionError &e) {
      notes.push_back(std::string("wilcox_nonzero: ") + e.what());
    }
  } else {
    notes.push_back("fewer than " + std::to_string(kWilcoxonMinPairs) + " scored items; no test");
  }
  stats["notes"] = notes;

  nlohmann::json failures = nlohmann::json::array();
  for (const auto &[id, msg] : r.failures) failures.push_back({{"id", id}, {"error", msg}});
  return {{"conditions", {row("ground_truth", wg, sg, pg, eg), row("generated", wn, sn, pn, en)}},
          {"stats", stats},
          {"per_item", per_item},
          {"failures", failures},
          {"n_failed", r.failures.size()},
          {"metadata",
           {{"asr", r.asr},
            {"wer_units", "percent"},
            {"wer_mean", "mean of per-utterance WER"},
            {"wer_corpus", "pooled errors over pooled reference words"},
            {"stoi_reference", "clean speech"},
            {"pesq", "external only"}}}};
}

}  // namespace rirbench::speech
