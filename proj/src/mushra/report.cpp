// src/mushra/report.cpp

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

#include <cmath>
#include <map>
#include <set>

#include "rirbench/mushra.hpp"
#include "rirbench/speech.hpp"

namespace rirbench::mushra {

nlohmann::json to_json(const RatingRecord &r) {
  return {{"listener_id", r.listener_id},
          {"trial_id", r.trial_id},
          {"stimulus_id", r.stimulus_id},
          {"score", r.score},
          {"submitted_at", r.submitted_at}};
}

RatingRecord rating_from_json(const nlohmann::json &j) {
  RatingRecord r;
  r.listener_id = j.at("listener_id").get<std::string>();
  r.trial_id = j.at("trial_id").get<std::string>();
  r.stimulus_id = j.at("stimulus_id").get<std::string>();
  r.score = j.at("score").get<int>();
  r.submitted_at = j.value("submitted_at", std::string());
  return r;
}

std::vector<TrialScores> collate(const Session &s, std::span<const RatingRecord> records) {
  std::map<std::string, std::pair<std::string, std::string>> stim;  // id -> (trial, condition)
  for (const auto &t : s.trials)
    for (const auto &x : t.stimuli) stim[x.id] = {t.trial_id, x.condition};
  std::map<std::pair<std::string, std::string>, TrialScores> acc;
  for (const auto &r : records) {
    auto it = stim.find(r.stimulus_id);
    if (it == stim.end() || it->second.first != r.trial_id) continue;
    auto &ts = acc[{r.listener_id, r.trial_id}];
    ts.listener_id = r.listener_id;
    ts.trial_id = r.trial_id;
    ts.by_condition.emplace(it->second.second, r.score);
  }
  std::vector<TrialScores> out;
  for (auto &[_, ts] : acc) out.push_back(std::move(ts));
  return out;
}

nlohmann::json to_json(const ScreeningResult &r) {
  return {{"listener_id", r.listener_id},
          {"trials_rated", r.trials_rated},
          {"hidden_ref_below_90", r.hidden_ref_below_90},
          {"violation_rate", r.violation_rate},
          {"excluded", r.excluded},
          {"note", r.note ? nlohmann::json(*r.note) : nlohmann::json()}};
}

std::vector<ScreeningResult> screen_listeners(std::span<const ListenerTrials> listeners) {
  std::vector<ScreeningResult> out;
  for (const auto &l : listeners) {
    ScreeningResult r;
    r.listener_id = l.listener_id;
    r.trials_rated = l.hidden_reference_scores.size();
    if (r.trials_rated == 0) {
      r.note = "no completed trials; skipped";
      out.push_back(std::move(r));
      continue;
    }
    for (int score : l.hidden_reference_scores)
      if (score < kReferenceThreshold) ++r.hidden_ref_below_90;
    r.violation_rate = static_cast<double>(r.hidden_ref_below_90) / static_cast<double>(r.trials_rated);
    // Integer form of rate > 0.15, free of rounding at the boundary.
    r.excluded = r.hidden_ref_below_90 * 100 > r.trials_rated * kMaxViolationPercent;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ScreeningResult> screen_listeners(std::span<const TrialScores> trials) {
  std::map<std::string, ListenerTrials> by;
  for (const auto &t : trials) {
    auto &l = by[t.listener_id];
    l.listener_id = t.listener_id;
    auto it = t.by_condition.find(kHiddenReference);
    if (it != t.by_condition.end()) l.hidden_reference_scores.push_back(it->second);
  }
  std::vector<ListenerTrials> v;
  for (auto &[_, l] : by) v.push_back(std::move(l));
  return screen_listeners(std::span<const ListenerTrials>(v));
}

namespace {

nlohmann::json summary(const std::string &condition, const std::vector<double> &v) {
  nlohmann::json j{{"condition", condition}, {"n", v.size()}, {"mean", nullptr},
                   {"sd", nullptr}, {"ci95_halfwidth", nullptr}};
  if (v.empty()) return j;
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  j["mean"] = m;
  if (v.size() >= 2) {
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    j["sd"] = sd;
    j["ci95_halfwidth"] = 1.96 * sd / std::sqrt(static_cast<double>(v.size()));
  }
  return j;
}

nlohmann::json paired_tests(const std::vector<double> &a, const std::vector<double> &b,
                            const std::string &label, std::vector<std::string> &warnings) {
  nlohmann::json j{{"n", a.size()}, {"pratt", nullptr}, {"wilcox_nonzero", nullptr}};
  try {
    j["pratt"] = speech::to_json(speech::wilcoxon_signed_rank(a, b, speech::ZeroMethod::kPratt));
    j["wilcox_nonzero"] =
        speech::to_json(speech::wilcoxon_signed_rank(a, b, speech::ZeroMethod::kWilcoxDropZeros));
  } catch (const PreconditionError &e) {
    warnings.push_back(label + ": " + e.what());
  }
  return j;
}

}  // namespace

nlohmann::json mushra_report(std::span<const TrialScores> trials,
                             std::span<const ScreeningResult> screening,
                             const std::vector<std::string> &conditions, const std::string &proposed,
                             Aggregation aggregation) {
  std::set<std::string> excluded;
  std::size_t retained_listeners = 0;
  nlohmann::json screen = nlohmann::json::array();
  for (const auto &r : screening) {
    screen.push_back(to_json(r));
    if (r.excluded) excluded.insert(r.listener_id);
    else if (r.trials_rated > 0) ++retained_listeners;
  }

  std::vector<const TrialScores *> kept;
  for (const auto &t : trials)
    if (!excluded.count(t.listener_id)) kept.push_back(&t);

  std::vector<std::string> warnings;
  // Pooled per-condition scores and per-listener means.
  std::map<std::string, std::vector<double>> pooled;
  std::map<std::string, std::map<std::string, std::pair<double, std::size_t>>> per_listener;
  for (const auto *t : kept)
    for (const auto &[c, score] : t->by_condition) {
      pooled[c].push_back(score);
      auto &acc = per_listener[c][t->listener_id];
      acc.first += score;
      acc.second += 1;
    }
  auto listener_means = [&](const std::string &c) {
    std::map<std::string, double> m;
    for (const auto &[l, acc] : per_listener[c]) m[l] = acc.first / static_cast<double>(acc.second);
    return m;
  };

  nlohmann::json rows = nlohmann::json::array();
  for (const auto &c : conditions) {
    std::vector<double> v;
    if (aggregation == Aggregation::kPooled) {
      v = pooled[c];
    } else {
      for (const auto &[_, m] : listener_means(c)) v.push_back(m);
    }
    if (v.empty()) {
      warnings.push_back("condition '" + c + "' has no retained ratings");
      spdlog::warn("listening test: condition '{}' has no retained ratings", c);
    }
    rows.push_back(summary(c, v));
  }

  nlohmann::json comparisons = nlohmann::json::array();
  for (const auto &c : conditions) {
    if (c == proposed) continue;
    std::vector<double> a, b;
    for (const auto *t : kept) {
      auto ia = t->by_condition.find(proposed), ib = t->by_condition.find(c);
      if (ia == t->by_condition.end() || ib == t->by_condition.end()) continue;
      a.push_back(ia->second);
      b.push_back(ib->second);
    }
    std::vector<double> la, lb;
    const auto ma = listener_means(proposed), mb = listener_means(c);
    for (const auto &[l, m] : ma)
      if (auto it = mb.find(l); it != mb.end()) {
        la.push_back(m);
        lb.push_back(it->second);
      }
    comparisons.push_back(
        {{"condition", c},
         {"by_listener_trial", paired_tests(a, b, proposed + " vs " + c + " (listener, trial)", warnings)},
         {"by_listener_mean", paired_tests(la, lb, proposed + " vs " + c + " (listener means)", warnings)}});
  }

  return {{"screening", screen},
          {"n_listeners", screening.size()},
          {"n_retained", retained_listeners},
          {"aggregation", aggregation == Aggregation::kPooled ? "pooled" : "per_listener"},
          {"ci", "1.96 * sd / sqrt(n)"},
          {"proposed", proposed},
          {"conditions", rows},
          {"comparisons", comparisons},
          {"alternative", "two-sided"},
          {"warnings", warnings}};
}

}  // namespace rirbench::mushra
