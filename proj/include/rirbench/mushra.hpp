// include/rirbench/mushra.hpp

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

#ifndef RIRBENCH_MUSHRA_HPP_
#define RIRBENCH_MUSHRA_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace rirbench::mushra {

inline constexpr const char *kHiddenReference = "hidden_reference";
inline constexpr const char *kAnchor = "anchor";
inline constexpr int kReferenceThreshold = 90;
/// Exclusion needs violations / trials strictly above 15 / 100.
inline constexpr int kMaxViolationPercent = 15;

/// One test item: clean speech, its ground-truth RIR, and one RIR per
/// system under test. Relative paths resolve against the manifest.
struct ManifestItem {
  std::string id;
  std::filesystem::path clean;
  std::filesystem::path gt_rir;
  std::map<std::string, std::filesystem::path> systems;
  std::string prompt;
  std::optional<std::string> image;
};

std::vector<ManifestItem> read_manifest(const std::filesystem::path &path);

enum class AnchorKind { kLowpass, kMeanRir };

struct SessionConfig {
  std::filesystem::path manifest_ref;
  std::uint64_t seed = 0;
  std::size_t trials_per_listener = 30;
  std::string proposed;  // empty: "proposed" if present, else first system
  AnchorKind anchor = AnchorKind::kLowpass;
};

SessionConfig session_config_from_json(const nlohmann::json &j);
nlohmann::json to_json(const SessionConfig &c);

struct StimulusDef {
  std::string id;         // opaque
  std::string condition;  // never served before report time
  std::string file;       // relative to the session directory
};

struct TrialDef {
  std::string trial_id;
  std::string item_id;
  std::string prompt;
  std::optional<std::string> image;
  StimulusDef reference;              // the labeled open reference
  std::vector<StimulusDef> stimuli;   // hidden ref + anchor + systems
};

struct Session {
  std::string id;
  SessionConfig config;
  std::vector<std::string> conditions;  // hidden_reference, anchor, systems...
  std::string proposed;
  std::vector<TrialDef> trials;
  std::filesystem::path dir;
};

nlohmann::json to_json(const Session &s);
Session session_from_json(const nlohmann::json &j, std::filesystem::path dir);

/// Deterministic in the config and the manifest file contents.
std::string session_id_for(const SessionConfig &config);

/// Writes session.json and stimuli/ under sessions_root/<id>. Every stimulus
/// of a trial shares one peak-normalization gain and is zero-padded to the
/// trial's longest stimulus. Missing assets fail with their item ids.
Session build_session(std::span<const ManifestItem> items, const SessionConfig &config,
                      const std::filesystem::path &sessions_root);

/// Trial indices for a listener: trials_per_listener items drawn without
/// replacement, seeded by (session seed, listener).
std::vector<std::size_t> assign_trials(const Session &s, const std::string &listener);
/// Presentation order of trial `trial_index` for a listener.
std::vector<std::size_t> stimulus_order(const Session &s, const std::string &listener,
                                        std::size_t trial_index);

struct RatingRecord {
  std::string listener_id;
  std::string trial_id;
  std::string stimulus_id;
  int score = 0;
  std::string submitted_at;
};

nlohmann::json to_json(const RatingRecord &r);
RatingRecord rating_from_json(const nlohmann::json &j);

/// All scores one listener gave in one trial, keyed by condition.
struct TrialScores {
  std::string listener_id;
  std::string trial_id;
  std::map<std::string, int> by_condition;
};

std::vector<TrialScores> collate(const Session &s, std::span<const RatingRecord> records);

struct ScreeningResult {
  std::string listener_id;
  std::size_t trials_rated = 0;
  std::size_t hidden_ref_below_90 = 0;
  double violation_rate = 0.0;
  bool excluded = false;
  std::optional<std::string> note;
};

nlohmann::json to_json(const ScreeningResult &r);

struct ListenerTrials {
  std::string listener_id;
  std::vector<int> hidden_reference_scores;  // one per completed trial
};

/// A listener is excluded iff hidden-reference scores below 90 occur in
/// strictly more than 15% of their trials. No trials: kept out, with a note.
std::vector<ScreeningResult> screen_listeners(std::span<const ListenerTrials> listeners);
std::vector<ScreeningResult> screen_listeners(std::span<const TrialScores> trials);

enum class Aggregation { kPooled, kPerListener };

/// Per-condition mean and 1.96 sd / sqrt(n) over retained scores, plus
/// two-sided signed-rank tests of `proposed` against every other
/// condition, paired by (listener, trial) and by per-listener means.
nlohmann::json mushra_report(std::span<const TrialScores> trials,
                             std::span<const ScreeningResult> screening,
                             const std::vector<std::string> &conditions, const std::string &proposed,
                             Aggregation aggregation = Aggregation::kPooled);

/// Sessions on disk under root/sessions plus the rating logs.
class MushraService {
 public:
  explicit MushraService(std::filesystem::path root);

  /// Body: {manifest_ref, seed, trials_per_listener, proposed?, anchor?}.
  /// Re-posting an identical config returns the existing session.
  nlohmann::json create_session(const nlohmann::json &body);
  /// Blinded payload of the listener's next unrated trial, or {done: true}.
  nlohmann::json next_trial(const std::string &session_id, const std::string &listener);
  std::string stimulus_wav(const std::string &stimulus_id) const;
  /// Body: {listener, trial, scores: [{stimulus_id, score}], session?}.
  nlohmann::json submit_ratings(const nlohmann::json &body);
  nlohmann::json report(const std::string &session_id,
                        Aggregation aggregation = Aggregation::kPooled) const;

  std::vector<std::string> session_ids() const;
  Session session(const std::string &session_id) const;

 private:
  struct State;
  std::filesystem::path root_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<State>> sessions_;
  std::map<std::string, std::pair<std::string, std::string>> stimulus_index_;  // id -> (session, file)
  std::map<std::string, std::string> trial_index_;                             // trial -> session

  std::shared_ptr<State> find(const std::string &session_id) const;
  void register_session(Session s);
};

/// HTTP front end: the /api routes plus an optional static mount at / for
/// the listening-test UI bundle.
class MushraServer {
 public:
  MushraServer(std::shared_ptr<MushraService> service,
               std::optional<std::filesystem::path> static_dir = std::nullopt);
  ~MushraServer();
  MushraServer(const MushraServer &) = delete;
  MushraServer &operator=(const MushraServer &) = delete;

  int start(const std::string &host, int port);
  void listen(const std::string &host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace rirbench::mushra

#endif  // RIRBENCH_MUSHRA_HPP_
