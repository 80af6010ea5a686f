// tests/unit/test_mushra.cpp

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

#include "httplib.h"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>

#include "doctest.h"
#include "rirbench/dsp.hpp"
#include "rirbench/mushra.hpp"
#include "rirbench/util.hpp"
#include "rirbench/wav.hpp"
#include "test_support.hpp"

using namespace rirbench;
using namespace rirbench::mushra;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kRate = 16000;

// Writes `n` items with systems "proposed" and "ism" plus manifest.jsonl.
fs::path write_fixture(const fs::path &dir, std::size_t n) {
  fs::create_directories(dir / "audio");
  std::ofstream manifest(dir / "manifest.jsonl");
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = "item" + std::to_string(i);
    auto wav = [&](const std::string &name, const audio::AudioBuffer &b) {
      audio::write_wav(dir / "audio" / name, b, audio::WavFormat::kFloat32);
      return "audio/" + name;
    };
    const auto clean = wav(id + "_clean.wav", audio::AudioBuffer::mono(
                                                  rirbench::testing::speech_like(kRate, 0.3, 100 + i), kRate));
    const auto gt = wav(id + "_gt.wav", audio::AudioBuffer(rirbench::testing::exponential_rir(0.3, kRate, 0.1, 200 + i)));
    const auto prop = wav(id + "_p.wav", audio::AudioBuffer(rirbench::testing::exponential_rir(0.4, kRate, 0.1, 300 + i)));
    const auto ism = wav(id + "_i.wav", audio::AudioBuffer(rirbench::testing::exponential_rir(0.2, kRate, 0.1, 400 + i)));
    manifest << json{{"id", id},
                     {"clean", clean},
                     {"gt_rir", gt},
                     {"systems", {{"proposed", prop}, {"ism", ism}}},
                     {"prompt", "a small office with carpet"},
                     {"image", "img/" + id + ".png"}}
                    .dump()
             << "\n";
  }
  return dir / "manifest.jsonl";
}

SessionConfig config_for(const fs::path &manifest, std::size_t trials, std::uint64_t seed = 7) {
  SessionConfig c;
  c.manifest_ref = manifest;
  c.seed = seed;
  c.trials_per_listener = trials;
  return c;
}

std::string bytes_of(const fs::path &p) { return read_text_file(p); }

ListenerTrials listener(const std::string &id, std::size_t trials, std::size_t violations) {
  ListenerTrials l{id, {}};
  for (std::size_t k = 0; k < trials; ++k) l.hidden_reference_scores.push_back(k < violations ? 70 : 100);
  return l;
}

TrialScores scores(const std::string &l, const std::string &t, std::map<std::string, int> by) {
  return {l, t, std::move(by)};
}

const std::vector<std::string> kConditions{kHiddenReference, kAnchor, "ism", "proposed"};

const json *row_for(const json &report, const std::string &condition) {
  for (const auto &r : report["conditions"])
    if (r["condition"] == condition) return &r;
  return nullptr;
}

}  // namespace

TEST_SUITE("sessions") {
  TEST_CASE("trial structure, assets and determinism") {
    const auto dir = rirbench::testing::temp_dir("mushra-build");
    const auto manifest = write_fixture(dir, 30);
    const auto items = read_manifest(manifest);
    REQUIRE(items.size() == 30);
    const auto s = build_session(items, config_for(manifest, 30), dir / "a");
    CHECK(s.conditions == std::vector<std::string>{kHiddenReference, kAnchor, "ism", "proposed"});
    CHECK(s.proposed == "proposed");
    REQUIRE(s.trials.size() == 30);
    for (const auto &t : s.trials) {
      REQUIRE(t.stimuli.size() == 4);
      std::multiset<std::string> conds;
      for (const auto &x : t.stimuli) conds.insert(x.condition);
      CHECK(conds.count(kHiddenReference) == 1);
      CHECK(conds.count(kAnchor) == 1);
      const auto hidden = std::find_if(t.stimuli.begin(), t.stimuli.end(),
                                       [](const StimulusDef &x) { return x.condition == kHiddenReference; });
      CHECK(hidden->id != t.reference.id);
      CHECK(bytes_of(s.dir / hidden->file) == bytes_of(s.dir / t.reference.file));
      // One shared gain and length per trial.
      double peak = 0;
      std::size_t len = 0;
      for (const auto &x : t.stimuli) {
        const auto b = audio::read_wav(s.dir / x.file);
        peak = std::max(peak, b.peak());
        if (len == 0) len = b.frames();
        CHECK(b.frames() == len);
      }
      CHECK(peak == doctest::Approx(audio::kDefaultPeak).epsilon(1e-6));
    }

    // Every listener sees all 30 items exactly once, in a listener-specific order.
    for (const std::string l : {"alice", "bob", "carol"}) {
      auto a = assign_trials(s, l);
      CHECK(a.size() == 30);
      std::sort(a.begin(), a.end());
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == i);
    }
    CHECK(assign_trials(s, "alice") != assign_trials(s, "bob"));

    const auto again = build_session(items, config_for(manifest, 30), dir / "b");
    CHECK(again.id == s.id);
    CHECK(assign_trials(again, "alice") == assign_trials(s, "alice"));
    CHECK(stimulus_order(again, "alice", 3) == stimulus_order(s, "alice", 3));
    const auto reseeded = build_session(items, config_for(manifest, 30, 8), dir / "c");
    CHECK(reseeded.id != s.id);
    CHECK(session_from_json(to_json(s), s.dir).trials.size() == 30);
    fs::remove_all(dir);
  }

  TEST_CASE("subsets, missing assets and bad configs") {
    const auto dir = rirbench::testing::temp_dir("mushra-missing");
    const auto manifest = write_fixture(dir, 6);
    auto items = read_manifest(manifest);
    const auto s = build_session(items, config_for(manifest, 4), dir / "a");
    CHECK(assign_trials(s, "x").size() == 4);
    std::set<std::size_t> distinct;
    for (auto t : assign_trials(s, "x")) distinct.insert(t);
    CHECK(distinct.size() == 4);

    CHECK_THROWS_AS(build_session(items, config_for(manifest, 7), dir / "b"), ParameterError);
    items[2].systems["ism"] = dir / "gone.wav";
    items[4].clean = dir / "gone.wav";
    try {
      build_session(items, config_for(manifest, 4), dir / "b");
      FAIL("expected ValidationError");
    } catch (const ValidationError &e) {
      CHECK(e.ids() == std::vector<std::string>{"item2", "item4"});
    }
    auto cfg = config_for(manifest, 4);
    cfg.proposed = "nope";
    CHECK_THROWS_AS(build_session(read_manifest(manifest), cfg, dir / "b"), ParameterError);
    CHECK_THROWS_AS(session_config_from_json({{"manifest_ref", "m"}, {"anchor", "sine"}}), ParameterError);
    fs::remove_all(dir);
  }

  TEST_CASE("mean-RIR anchor") {
    const auto dir = rirbench::testing::temp_dir("mushra-anchor");
    const auto manifest = write_fixture(dir, 3);
    auto cfg = config_for(manifest, 3);
    cfg.anchor = AnchorKind::kMeanRir;
    const auto s = build_session(read_manifest(manifest), cfg, dir / "s");
    CHECK(s.trials[0].stimuli.size() == 4);
    CHECK(to_json(s)["config"]["anchor"] == "mean_rir");
    fs::remove_all(dir);
  }
}

TEST_SUITE("screening") {
  TEST_CASE("nineteen listeners, two over the limit") {
    std::vector<ListenerTrials> ls;
    for (int i = 0; i < 17; ++i) ls.push_back(listener("ok" + std::to_string(i), 30, static_cast<std::size_t>(i % 5)));
    ls.push_back(listener("bad0", 30, 5));
    ls.push_back(listener("bad1", 30, 5));
    const auto r = screen_listeners(std::span<const ListenerTrials>(ls));
    std::size_t kept = 0;
    for (const auto &x : r) {
      CHECK(x.excluded == (x.listener_id.rfind("bad", 0) == 0));
      CHECK(x.excluded == (x.violation_rate > 0.15));
      kept += !x.excluded;
    }
    CHECK(kept == 17);
    CHECK(r[17].violation_rate == doctest::Approx(5.0 / 30.0));
  }

  TEST_CASE("boundary and edge cases") {
    const std::vector<ListenerTrials> ls{listener("edge", 20, 3), listener("over", 20, 4),
                                         listener("perfect", 30, 0), {"idle", {}}};
    const auto r = screen_listeners(std::span<const ListenerTrials>(ls));
    CHECK_FALSE(r[0].excluded);
    CHECK(r[0].violation_rate == 0.15);
    CHECK(r[1].excluded);
    CHECK_FALSE(r[2].excluded);
    CHECK_FALSE(r[3].excluded);
    CHECK(r[3].note.has_value());
    // A score of exactly 90 is not a violation.
    const std::vector<ListenerTrials> ninety{{"n", {90, 90, 90, 90, 89}}};
    CHECK(screen_listeners(std::span<const ListenerTrials>(ninety))[0].hidden_ref_below_90 == 1);
  }

  TEST_CASE("adding a violation never rescues a listener") {
    std::mt19937 rng(15);
    for (int k = 0; k < 2000; ++k) {
      ListenerTrials l{"x", {}};
      const std::size_t n = 1 + rng() % 40;
      for (std::size_t i = 0; i < n; ++i) l.hidden_reference_scores.push_back(static_cast<int>(rng() % 101));
      const bool before = screen_listeners(std::span<const ListenerTrials>(&l, 1))[0].excluded;
      auto extra = l;
      extra.hidden_reference_scores.push_back(static_cast<int>(rng() % 90));
      auto flipped = l;
      for (auto &s : flipped.hidden_reference_scores)
        if (s >= 90) {
          s = 50;
          break;
        }
      for (const auto &m : {extra, flipped})
        if (before) REQUIRE(screen_listeners(std::span<const ListenerTrials>(&m, 1))[0].excluded);
    }
  }
}

TEST_SUITE("report") {
  TEST_CASE("constant condition and a dominating system") {
    std::vector<TrialScores> ts;
    for (int l = 0; l < 3; ++l)
      for (int t = 0; t < 4; ++t) {
        const int b = 30 + 5 * t + l;
        ts.push_back(scores("l" + std::to_string(l), "t" + std::to_string(t),
                            {{kHiddenReference, 100}, {kAnchor, 80}, {"ism", b}, {"proposed", b + 10}}));
      }
    const auto screening = screen_listeners(std::span<const TrialScores>(ts));
    const auto r = mushra_report(ts, screening, kConditions, "proposed");
    const auto *anchor = row_for(r, kAnchor);
    CHECK((*anchor)["mean"] == 80.0);
    CHECK((*anchor)["ci95_halfwidth"] == 0.0);
    CHECK((*anchor)["n"] == 12);
    for (const auto &c : r["comparisons"]) {
      if (c["condition"] != "ism") continue;
      CHECK(c["by_listener_trial"]["n"] == 12);
      CHECK(c["by_listener_trial"]["pratt"]["p_value"].get<double>() < 0.01);
      CHECK(c["by_listener_trial"]["pratt"]["p_value"].get<double>() == std::ldexp(2.0, -12));
      CHECK(c["by_listener_mean"]["n"] == 3);
    }
    CHECK(r["n_retained"] == 3);
    CHECK(r["alternative"] == "two-sided");
  }

  TEST_CASE("mean and interval are the textbook formulas") {
    std::vector<TrialScores> ts;
    const std::vector<int> v{40, 55, 61, 47, 52, 70};
    for (std::size_t i = 0; i < v.size(); ++i)
      ts.push_back(scores("l", "t" + std::to_string(i), {{kHiddenReference, 100}, {"proposed", v[i]}}));
    const auto r = mushra_report(ts, screen_listeners(std::span<const TrialScores>(ts)),
                                 {kHiddenReference, "proposed"}, "proposed");
    double m = 0;
    for (int x : v) m += x;
    m /= 6.0;
    double ss = 0;
    for (int x : v) ss += (x - m) * (x - m);
    const auto *row = row_for(r, "proposed");
    CHECK((*row)["mean"].get<double>() == doctest::Approx(m).epsilon(1e-14));
    CHECK((*row)["ci95_halfwidth"].get<double>() ==
          doctest::Approx(1.96 * std::sqrt(ss / 5.0) / std::sqrt(6.0)).epsilon(1e-14));
  }

  TEST_CASE("excluded listeners are left out") {
    std::vector<TrialScores> ts;
    for (int t = 0; t < 5; ++t) {
      ts.push_back(scores("good", "t" + std::to_string(t), {{kHiddenReference, 100}, {"proposed", 60}}));
      ts.push_back(scores("bad", "t" + std::to_string(t), {{kHiddenReference, 10}, {"proposed", 0}}));
    }
    const auto r = mushra_report(ts, screen_listeners(std::span<const TrialScores>(ts)),
                                 {kHiddenReference, "proposed"}, "proposed");
    CHECK((*row_for(r, "proposed"))["mean"] == 60.0);
    CHECK(r["n_listeners"] == 2);
    CHECK(r["n_retained"] == 1);
    const auto per = mushra_report(ts, screen_listeners(std::span<const TrialScores>(ts)),
                                   {kHiddenReference, "proposed"}, "proposed", Aggregation::kPerListener);
    CHECK((*row_for(per, "proposed"))["n"] == 1);
  }

  TEST_CASE("empty input gives zero counts with warnings") {
    const auto r = mushra_report({}, {}, kConditions, "proposed");
    for (const auto &row : r["conditions"]) {
      CHECK(row["n"] == 0);
      CHECK(row["mean"].is_null());
    }
    CHECK(r["warnings"].size() >= 4);
  }
}

TEST_SUITE("http contract") {
  TEST_CASE("session lifecycle over HTTP") {
    const auto dir = rirbench::testing::temp_dir("mushra-http");
    const auto manifest = write_fixture(dir, 5);
    fs::create_directories(dir / "ui");
    write_text_file(dir / "ui" / "index.html", "<html>listening test</html>");
    auto service = std::make_shared<MushraService>(dir / "root");
    MushraServer server(service, dir / "ui");
    const int port = server.start("127.0.0.1", 0);
    httplib::Client cli("127.0.0.1", port);

    auto post = [&](const std::string &path, const json &body) {
      auto res = cli.Post(path, body.dump(), "application/json");
      REQUIRE(res);
      return std::make_pair(res->status, json::parse(res->body));
    };
    auto get = [&](const std::string &path) {
      auto res = cli.Get(path);
      REQUIRE(res);
      return std::make_pair(res->status, res->body);
    };

    const json cfg{{"manifest_ref", manifest.string()}, {"seed", 3}, {"trials_per_listener", 4}};
    auto [st, created] = post("/api/sessions", cfg);
    CHECK(st == 201);
    CHECK(created["created"] == true);
    const std::string sid = created["session_id"];
    CHECK(post("/api/sessions", cfg).second["session_id"] == sid);
    CHECK(post("/api/sessions", cfg).second["created"] == false);
    CHECK(post("/api/sessions", json{{"manifest_ref", (dir / "none.jsonl").string()}}).first == 422);

    // Report before any ratings.
    auto [rs, empty_body] = get("/api/sessions/" + sid + "/report");
    CHECK(rs == 200);
    const auto empty = json::parse(empty_body);
    for (const auto &row : empty["conditions"]) CHECK(row["n"] == 0);
    CHECK(empty["n_ratings"] == 0);

    auto [ns, next_body] = get("/api/sessions/" + sid + "/listeners/alice/next");
    CHECK(ns == 200);
    const auto next = json::parse(next_body);
    // Blindness: no condition label anywhere in the served payload.
    for (const char *label : {kHiddenReference, kAnchor, "proposed", "ism", "condition", ".wav"})
      CHECK_MESSAGE(next_body.find(label) == std::string::npos, std::string(label));
    const auto &trial = next["trial"];
    CHECK(trial["stimuli"].size() == 4);
    CHECK(trial["context"]["prompt"] == "a small office with carpet");
    CHECK(next["trials_total"] == 4);

    // The open reference's bytes match exactly one blinded stimulus.
    const auto ref_bytes = get("/api/stimuli/" + trial["reference"]["stimulus_id"].get<std::string>());
    CHECK(ref_bytes.first == 200);
    int identical = 0;
    for (const auto &x : trial["stimuli"])
      identical += get("/api/stimuli/" + x["stimulus_id"].get<std::string>()).second == ref_bytes.second;
    CHECK(identical == 1);
    CHECK(get("/api/stimuli/xnotreal").first == 404);

    // Map stimulus ids to conditions from the session definition, like the
    // report does.
    const auto session = service->session(sid);
    std::map<std::string, std::string> cond_of;
    for (const auto &t : session.trials)
      for (const auto &x : t.stimuli) cond_of[x.id] = x.condition;
    auto rating_body = [&](const json &tr, int hidden, int other, std::size_t drop = 99) {
      json sc = json::array();
      for (std::size_t k = 0; k < tr["stimuli"].size(); ++k) {
        if (k == drop) continue;
        const std::string id = tr["stimuli"][k]["stimulus_id"];
        sc.push_back({{"stimulus_id", id}, {"score", cond_of[id] == kHiddenReference ? hidden : other}});
      }
      return json{{"listener", "alice"}, {"trial", tr["trial_id"]}, {"scores", sc}};
    };

    auto [vs, missing] = post("/api/ratings", rating_body(trial, 100, 50, 1));
    CHECK(vs == 422);
    CHECK(missing["ids"] == json::array({trial["stimuli"][1]["stimulus_id"]}));
    auto out_of_range = rating_body(trial, 100, 50);
    out_of_range["scores"][0]["score"] = 101;
    CHECK(post("/api/ratings", out_of_range).first == 422);
    auto unknown = rating_body(trial, 100, 50);
    unknown["scores"].push_back({{"stimulus_id", "xbogus"}, {"score", 3}});
    CHECK(post("/api/ratings", unknown).first == 404);
    auto bad_trial = rating_body(trial, 100, 50);
    bad_trial["trial"] = "tnope";
    CHECK(post("/api/ratings", bad_trial).first == 404);
    auto raw = cli.Post("/api/ratings", "{not json", "application/json");
    REQUIRE(raw);
    CHECK(raw->status == 400);

    const auto good = rating_body(trial, 100, 50);
    auto [ok, stored] = post("/api/ratings", good);
    CHECK(ok == 200);
    CHECK(stored["status"] == "stored");
    const auto log = session.dir / "ratings.jsonl";
    const auto log_after_first = read_text_file(log);
    auto [dup_status, dup] = post("/api/ratings", good);
    CHECK(dup_status == 200);
    CHECK(dup["status"] == "duplicate");
    CHECK(read_text_file(log) == log_after_first);
    CHECK(post("/api/ratings", rating_body(trial, 100, 51)).first == 409);
    CHECK(read_text_file(log) == log_after_first);

    // Finish alice and rate as bob too.
    for (const std::string who : {"alice", "bob"}) {
      for (int guard = 0; guard < 10; ++guard) {
        const auto n = json::parse(get("/api/sessions/" + sid + "/listeners/" + who + "/next").second);
        if (n["done"] == true) break;
        auto body = rating_body(n["trial"], who == "bob" ? 80 : 95, 40 + guard);
        body["listener"] = who;
        REQUIRE(post("/api/ratings", body).first == 200);
      }
    }
    CHECK(json::parse(get("/api/sessions/" + sid + "/listeners/alice/next").second)["done"] == true);

    // Report means recompute from the raw log alone.
    std::map<std::string, std::set<std::string>> listeners_below;
    std::map<std::string, std::pair<double, int>> sums;
    const auto rows = read_jsonl(log);
    CHECK(rows.size() == 2 * 4 * 4);
    for (const auto &r : rows)
      if (cond_of[r["stimulus_id"]] == kHiddenReference && r["score"].get<int>() < 90)
        listeners_below[r["listener_id"]].insert(r["trial_id"]);
    for (const auto &r : rows) {
      if (listeners_below.count(r["listener_id"])) continue;  // bob: 4 of 4 below 90
      auto &acc = sums[cond_of[r["stimulus_id"]]];
      acc.first += r["score"].get<int>();
      acc.second += 1;
    }
    const auto report = json::parse(get("/api/sessions/" + sid + "/report").second);
    CHECK(report["n_ratings"] == 32);
    CHECK(report["n_retained"] == 1);
    for (const auto &[c, acc] : sums) CHECK((*row_for(report, c))["mean"] == acc.first / acc.second);
    CHECK(get("/api/sessions/" + sid + "/report?aggregation=per_listener").first == 200);
    CHECK(get("/api/sessions/" + sid + "/report?aggregation=median").first == 422);
    CHECK(get("/api/sessions/snope/report").first == 404);

    // A fresh service over the same root reloads sessions and the log.
    MushraService reloaded(dir / "root");
    CHECK(reloaded.report(sid)["conditions"] == report["conditions"]);

    auto [ui_status, ui] = get("/index.html");
    CHECK(ui_status == 200);
    CHECK(ui.find("listening test") != std::string::npos);
    server.stop();
    fs::remove_all(dir);
  }
}
