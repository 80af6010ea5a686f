// src/mushra/service.cpp

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

#include <chrono>
#include <ctime>
#include <fstream>
#include <set>

#include "rirbench/mushra.hpp"
#include "rirbench/util.hpp"

namespace rirbench::mushra {

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string join(const std::vector<std::string> &v) {
  std::string s;
  for (const auto &x : v) s += (s.empty() ? "" : ", ") + x;
  return s;
}

}  // namespace

struct MushraService::State {
  Session session;
  std::filesystem::path log;
  std::mutex writer;  // serializes appends and snapshot reads of the log
  std::map<std::pair<std::string, std::string>, std::map<std::string, int>> stored;
};

MushraService::MushraService(std::filesystem::path root) : root_(std::move(root)) {
  const auto dir = root_ / "sessions";
  if (!std::filesystem::exists(dir)) return;
  for (const auto &e : std::filesystem::directory_iterator(dir)) {
    const auto def = e.path() / "session.json";
    if (!std::filesystem::exists(def)) continue;
    register_session(session_from_json(nlohmann::json::parse(read_text_file(def)), e.path()));
  }
}

void MushraService::register_session(Session s) {
  auto st = std::make_shared<State>();
  st->log = s.dir / "ratings.jsonl";
  if (std::filesystem::exists(st->log))
    for (const auto &row : read_jsonl(st->log)) {
      const auto r = rating_from_json(row);
      st->stored[{r.listener_id, r.trial_id}].emplace(r.stimulus_id, r.score);
    }
  std::unique_lock lock(mutex_);
  for (const auto &t : s.trials) {
    trial_index_[t.trial_id] = s.id;
    stimulus_index_[t.reference.id] = {s.id, t.reference.file};
    for (const auto &x : t.stimuli) stimulus_index_[x.id] = {s.id, x.file};
  }
  st->session = std::move(s);
  sessions_[st->session.id] = std::move(st);
}

std::shared_ptr<MushraService::State> MushraService::find(const std::string &id) const {
  std::shared_lock lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFoundError("unknown session '" + id + "'");
  return it->second;
}

nlohmann::json MushraService::create_session(const nlohmann::json &body) {
  const auto config = session_config_from_json(body);
  if (!std::filesystem::exists(config.manifest_ref))
    throw ValidationError("manifest_ref not found: " + config.manifest_ref.string());
  const auto id = session_id_for(config);
  {
    std::shared_lock lock(mutex_);
    if (sessions_.count(id)) {
      const auto &s = sessions_.at(id)->session;
      return {{"session_id", id}, {"trials", s.trials.size()},
              {"trials_per_listener", s.config.trials_per_listener}, {"created", false}};
    }
  }
  const auto items = read_manifest(config.manifest_ref);
  Session s = build_session(items, config, root_ / "sessions");
  spdlog::info("listening-test session {} built: {} trials", s.id, s.trials.size());
  nlohmann::json out{{"session_id", s.id}, {"trials", s.trials.size()},
                     {"trials_per_listener", s.config.trials_per_listener}, {"created", true}};
  register_session(std::move(s));
  return out;
}

nlohmann::json MushraService::next_trial(const std::string &session_id, const std::string &listener) {
  if (trim(listener).empty()) throw ValidationError("empty listener token");
  const auto st = find(session_id);
  const Session &s = st->session;
  const auto assigned = assign_trials(s, listener);
  std::size_t done = 0;
  std::optional<std::size_t> next;
  {
    std::lock_guard lock(st->writer);
    for (std::size_t k = 0; k < assigned.size(); ++k) {
      if (st->stored.count({listener, s.trials[assigned[k]].trial_id})) {
        ++done;
      } else if (!next) {
        next = k;
      }
    }
  }
  nlohmann::json out{{"session_id", s.id}, {"listener", listener},
                     {"trials_total", assigned.size()}, {"trials_completed", done}};
  if (!next) {
    out["done"] = true;
    return out;
  }
  const std::size_t ti = assigned[*next];
  const TrialDef &t = s.trials[ti];
  nlohmann::json stimuli = nlohmann::json::array();
  for (std::size_t k : stimulus_order(s, listener, ti))
    stimuli.push_back({{"stimulus_id", t.stimuli[k].id}, {"url", "/api/stimuli/" + t.stimuli[k].id}});
  out["done"] = false;
  out["trial"] = {{"trial_id", t.trial_id},
                  {"position", *next + 1},
                  {"context", {{"prompt", t.prompt},
                               {"image", t.image ? nlohmann::json(*t.image) : nlohmann::json()}}},
                  {"reference", {{"stimulus_id", t.reference.id},
                                 {"url", "/api/stimuli/" + t.reference.id}}},
                  {"stimuli", stimuli}};
  return out;
}

std::string MushraService::stimulus_wav(const std::string &stimulus_id) const {
  std::pair<std::string, std::string> where;
  {
    std::shared_lock lock(mutex_);
    auto it = stimulus_index_.find(stimulus_id);
    if (it == stimulus_index_.end()) throw NotFoundError("unknown stimulus '" + stimulus_id + "'");
    where = it->second;
  }
  return read_text_file(find(where.first)->session.dir / where.second);
}

nlohmann::json MushraService::submit_ratings(const nlohmann::json &body) {
  std::string listener, trial_id;
  nlohmann::json scores;
  try {
    listener = body.at("listener").get<std::string>();
    trial_id = body.at("trial").get<std::string>();
    scores = body.at("scores");
  } catch (const nlohmann::json::exception &e) {
    throw ValidationError(std::string("rating submission: ") + e.what());
  }
  if (trim(listener).empty()) throw ValidationError("empty listener token");
  if (!scores.is_array()) throw ValidationError("scores must be an array");

  std::string session_id;
  {
    std::shared_lock lock(mutex_);
    auto it = trial_index_.find(trial_id);
    if (it == trial_index_.end()) throw NotFoundError("unknown trial '" + trial_id + "'");
    session_id = it->second;
  }
  if (body.contains("session") && body["session"].is_string() &&
      body["session"].get<std::string>() != session_id)
    throw NotFoundError("trial '" + trial_id + "' is not part of session '" +
                        body["session"].get<std::string>() + "'");
  const auto st = find(session_id);
  const Session &s = st->session;
  std::size_t ti = 0;
  while (s.trials[ti].trial_id != trial_id) ++ti;
  const auto assigned = assign_trials(s, listener);
  if (std::find(assigned.begin(), assigned.end(), ti) == assigned.end())
    throw ValidationError("trial '" + trial_id + "' is not assigned to listener '" + listener + "'");

  const TrialDef &t = s.trials[ti];
  std::set<std::string> expected;
  for (const auto &x : t.stimuli) expected.insert(x.id);
  std::map<std::string, int> got;
  std::vector<std::string> unknown;
  for (const auto &e : scores) {
    if (!e.is_object() || !e.contains("stimulus_id") || !e["stimulus_id"].is_string() ||
        !e.contains("score"))
      throw ValidationError("each score needs stimulus_id and score");
    const auto id = e["stimulus_id"].get<std::string>();
    if (!e["score"].is_number_integer())
      throw ValidationError("score for " + id + " must be an integer", {id});
    const auto v = e["score"].get<long long>();
    if (v < 0 || v > 100) throw ValidationError("score for " + id + " is outside 0..100", {id});
    if (!expected.count(id)) {
      unknown.push_back(id);
      continue;
    }
    if (!got.emplace(id, static_cast<int>(v)).second)
      throw ValidationError("stimulus " + id + " rated twice", {id});
  }
  if (!unknown.empty())
    throw NotFoundError("stimuli not in trial " + trial_id + ": " + join(unknown));
  std::vector<std::string> missing;
  for (const auto &id : expected)
    if (!got.count(id)) missing.push_back(id);
  if (!missing.empty())
    throw ValidationError("unrated stimuli: " + join(missing), missing);

  std::lock_guard lock(st->writer);
  const auto key = std::make_pair(listener, trial_id);
  if (auto it = st->stored.find(key); it != st->stored.end()) {
    if (it->second == got) return {{"status", "duplicate"}, {"stored", got.size()}};
    throw ConflictError("listener '" + listener + "' already rated trial '" + trial_id +
                        "' with different scores");
  }
  const auto ts = utc_now();
  std::string lines;
  for (const auto &[id, v] : got)
    lines += to_json(RatingRecord{listener, trial_id, id, v, ts}).dump() + "\n";
  std::ofstream out(st->log, std::ios::app | std::ios::binary);
  if (!out || !(out << lines) || !out.flush()) throw IoError("cannot append to " + st->log.string());
  st->stored.emplace(key, std::move(got));
  return {{"status", "stored"}, {"stored", expected.size()}};
}

nlohmann::json MushraService::report(const std::string &session_id, Aggregation aggregation) const {
  const auto st = find(session_id);
  std::vector<RatingRecord> records;
  {
    std::lock_guard lock(st->writer);
    if (std::filesystem::exists(st->log))
      for (const auto &row : read_jsonl(st->log)) records.push_back(rating_from_json(row));
  }
  const auto trials = collate(st->session, records);
  const auto screening = screen_listeners(std::span<const TrialScores>(trials));
  auto r = mushra_report(trials, screening, st->session.conditions, st->session.proposed, aggregation);
  r["session_id"] = session_id;
  r["n_ratings"] = records.size();
  return r;
}

std::vector<std::string> MushraService::session_ids() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> ids;
  for (const auto &[id, _] : sessions_) ids.push_back(id);
  return ids;
}

Session MushraService::session(const std::string &session_id) const { return find(session_id)->session; }

}  // namespace rirbench::mushra
