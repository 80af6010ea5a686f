// src/mushra/session.cpp

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

#include <algorithm>
#include <limits>
#include <random>
#include <set>

#include "rirbench/dsp.hpp"
#include "rirbench/mushra.hpp"
#include "rirbench/util.hpp"
#include "rirbench/wav.hpp"

namespace rirbench::mushra {

namespace {

std::string short_hash(const std::string &s, std::size_t n = 16) { return sha256_hex(s).substr(0, n); }

std::uint64_t seed_for(std::uint64_t seed, const std::string &salt) {
  return std::stoull(sha256_hex(std::to_string(seed) + ":" + salt).substr(0, 16), nullptr, 16);
}

// Unbiased draw in [0, bound) from the raw engine output; engine output is
// specified by the standard, distributions are not.
std::uint64_t draw_below(std::mt19937_64 &rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  for (;;) {
    const std::uint64_t v = rng();
    if (v < limit) return v % bound;
  }
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[draw_below(rng, i)]);
  return p;
}

std::string anchor_name(AnchorKind k) { return k == AnchorKind::kLowpass ? "lowpass" : "mean_rir"; }

audio::ImpulseResponse at_rate(const audio::ImpulseResponse &rir, int rate) {
  return rir.sample_rate() == rate ? rir : audio::resample(rir, rate);
}

nlohmann::json stimulus_json(const StimulusDef &s) {
  return {{"id", s.id}, {"condition", s.condition}, {"file", s.file}};
}

StimulusDef stimulus_from(const nlohmann::json &j) {
  return {j.at("id").get<std::string>(), j.at("condition").get<std::string>(),
          j.at("file").get<std::string>()};
}

}  // namespace

std::vector<ManifestItem> read_manifest(const std::filesystem::path &path) {
  const auto base = path.parent_path();
  std::vector<ManifestItem> items;
  std::set<std::string> seen;
  for (const auto &j : read_jsonl(path)) {
    ManifestItem it;
    try {
      it.id = j.at("id").get<std::string>();
      it.clean = resolve_path(base, j.at("clean").get<std::string>());
      it.gt_rir = resolve_path(base, j.at("gt_rir").get<std::string>());
      for (const auto &[name, p] : j.at("systems").items())
        it.systems[name] = resolve_path(base, p.get<std::string>());
      it.prompt = j.value("prompt", std::string());
      if (j.contains("image") && j["image"].is_string()) it.image = j["image"].get<std::string>();
    } catch (const nlohmann::json::exception &e) {
      throw ParseError("listening-test manifest " + path.string() + ": " + e.what());
    }
    if (it.systems.empty()) throw ValidationError("item " + it.id + " lists no systems", {it.id});
    for (const auto &[name, _] : it.systems)
      if (name == kHiddenReference || name == kAnchor)
        throw ValidationError("system name '" + name + "' is reserved", {it.id});
    if (!seen.insert(it.id).second) throw ValidationError("duplicate item id " + it.id, {it.id});
    items.push_back(std::move(it));
  }
  return items;
}

SessionConfig session_config_from_json(const nlohmann::json &j) {
  SessionConfig c;
  try {
    c.manifest_ref = j.at("manifest_ref").get<std::string>();
    c.seed = j.value("seed", std::uint64_t{0});
    c.trials_per_listener = j.value("trials_per_listener", std::size_t{30});
    c.proposed = j.value("proposed", std::string());
    const auto anchor = j.value("anchor", std::string("lowpass"));
    if (anchor == "lowpass") c.anchor = AnchorKind::kLowpass;
    else if (anchor == "mean_rir") c.anchor = AnchorKind::kMeanRir;
    else throw ParameterError("anchor", "must be 'lowpass' or 'mean_rir', got '" + anchor + "'");
  } catch (const nlohmann::json::exception &e) {
    throw ValidationError(std::string("session config: ") + e.what());
  }
  if (c.trials_per_listener == 0) throw ParameterError("trials_per_listener", "must be positive");
  return c;
}

nlohmann::json to_json(const SessionConfig &c) {
  return {{"manifest_ref", c.manifest_ref.string()},
          {"seed", c.seed},
          {"trials_per_listener", c.trials_per_listener},
          {"proposed", c.proposed},
          {"anchor", anchor_name(c.anchor)}};
}

nlohmann::json to_json(const Session &s) {
  nlohmann::json trials = nlohmann::json::array();
  for (const auto &t : s.trials) {
    nlohmann::json st = nlohmann::json::array();
    for (const auto &x : t.stimuli) st.push_back(stimulus_json(x));
    trials.push_back({{"trial_id", t.trial_id},
                      {"item_id", t.item_id},
                      {"prompt", t.prompt},
                      {"image", t.image ? nlohmann::json(*t.image) : nlohmann::json()},
                      {"reference", stimulus_json(t.reference)},
                      {"stimuli", st}});
  }
  return {{"session_id", s.id},
          {"config", to_json(s.config)},
          {"conditions", s.conditions},
          {"proposed", s.proposed},
          {"trials", trials}};
}

Session session_from_json(const nlohmann::json &j, std::filesystem::path dir) {
  Session s;
  s.id = j.at("session_id").get<std::string>();
  s.config = session_config_from_json(j.at("config"));
  s.conditions = j.at("conditions").get<std::vector<std::string>>();
  s.proposed = j.at("proposed").get<std::string>();
  for (const auto &t : j.at("trials")) {
    TrialDef d;
    d.trial_id = t.at("trial_id").get<std::string>();
    d.item_id = t.at("item_id").get<std::string>();
    d.prompt = t.value("prompt", std::string());
    if (t.contains("image") && t["image"].is_string()) d.image = t["image"].get<std::string>();
    d.reference = stimulus_from(t.at("reference"));
    for (const auto &x : t.at("stimuli")) d.stimuli.push_back(stimulus_from(x));
    s.trials.push_back(std::move(d));
  }
  s.dir = std::move(dir);
  return s;
}

std::string session_id_for(const SessionConfig &config) {
  nlohmann::json fingerprint = to_json(config);
  fingerprint.erase("manifest_ref");
  fingerprint["manifest"] = sha256_hex(read_text_file(config.manifest_ref));
  return "s" + short_hash(fingerprint.dump(), 12);
}

Session build_session(std::span<const ManifestItem> items, const SessionConfig &config,
                      const std::filesystem::path &sessions_root) {
  if (items.empty()) throw ValidationError("listening-test manifest has no items");
  if (config.trials_per_listener > items.size())
    throw ParameterError("trials_per_listener",
                         std::to_string(config.trials_per_listener) + " exceeds the " +
                             std::to_string(items.size()) + " available items");

  std::set<std::string> systems;
  for (const auto &[name, _] : items.front().systems) systems.insert(name);
  std::vector<std::string> missing;
  for (const auto &it : items) {
    std::set<std::string> mine;
    for (const auto &[name, _] : it.systems) mine.insert(name);
    bool ok = mine == systems && std::filesystem::exists(it.clean) &&
              std::filesystem::exists(it.gt_rir);
    for (const auto &[_, p] : it.systems) ok = ok && std::filesystem::exists(p);
    if (!ok) missing.push_back(it.id);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto &m : missing) list += (list.empty() ? "" : ", ") + m;
    throw ValidationError("missing or inconsistent assets for items: " + list, missing);
  }

  Session s;
  s.config = config;
  s.proposed = config.proposed.empty() ? (systems.count("proposed") ? "proposed" : *systems.begin())
                                       : config.proposed;
  if (!systems.count(s.proposed))
    throw ParameterError("proposed", "'" + s.proposed + "' is not a system in the manifest");
  s.conditions = {kHiddenReference, kAnchor};
  s.conditions.insert(s.conditions.end(), systems.begin(), systems.end());

  s.id = session_id_for(config);
  s.dir = sessions_root / s.id;

  std::optional<audio::ImpulseResponse> mean_rir;
  if (config.anchor == AnchorKind::kMeanRir) {
    // Sample-wise mean of the ground-truth RIRs at the first item's rate.
    const int rate = audio::read_wav(items.front().clean).sample_rate();
    std::vector<double> acc;
    for (const auto &it : items) {
      const auto rir = at_rate(audio::read_rir(it.gt_rir), rate);
      const auto ch = rir.channel(0);
      if (acc.size() < ch.size()) acc.resize(ch.size(), 0.0);
      for (std::size_t i = 0; i < ch.size(); ++i) acc[i] += ch[i];
    }
    for (double &v : acc) v /= static_cast<double>(items.size());
    mean_rir = audio::ImpulseResponse::mono(std::move(acc), rate);
  }

  std::filesystem::create_directories(s.dir / "stimuli");
  for (const auto &it : items) {
    const auto clean = audio::read_wav(it.clean);
    const int rate = clean.sample_rate();
    std::vector<std::pair<std::string, audio::AudioBuffer>> rendered;
    rendered.emplace_back(kHiddenReference,
                          audio::convolve(clean, at_rate(audio::read_rir(it.gt_rir), rate)));
    rendered.emplace_back(kAnchor, config.anchor == AnchorKind::kLowpass
                                       ? audio::lowpass_anchor(clean)
                                       : audio::convolve(clean, at_rate(*mean_rir, rate)));
    for (const auto &[name, path] : it.systems)
      rendered.emplace_back(name, audio::convolve(clean, at_rate(audio::read_rir(path), rate)));

    std::size_t len = 0;
    double peak = 0.0;
    for (const auto &[_, b] : rendered) {
      len = std::max(len, b.frames());
      peak = std::max(peak, b.peak());
    }
    if (peak == 0.0) throw AnalysisError("item " + it.id + ": all stimuli are silent");
    const double gain = audio::kDefaultPeak / peak;

    TrialDef t;
    t.trial_id = "t" + short_hash(s.id + ":" + it.id, 12);
    t.item_id = it.id;
    t.prompt = it.prompt;
    t.image = it.image;
    for (auto &[name, b] : rendered) {
      for (auto &ch : b.channels_mut()) {
        ch.resize(len, 0.0);
        for (double &v : ch) v *= gain;
      }
      const auto bytes = audio::encode_wav(b, audio::WavFormat::kFloat32);
      auto write = [&](const std::string &role) {
        StimulusDef d{"x" + short_hash(s.id + ":" + it.id + ":" + role, 16), name, ""};
        d.file = "stimuli/" + d.id + ".wav";
        write_text_file(s.dir / d.file, std::string_view(reinterpret_cast<const char *>(bytes.data()),
                                                          bytes.size()));
        return d;
      };
      if (name == kHiddenReference) t.reference = write("reference");
      t.stimuli.push_back(write(name));
    }
    s.trials.push_back(std::move(t));
  }
  write_text_file(s.dir / "session.json", to_json(s).dump(2) + "\n");
  return s;
}

std::vector<std::size_t> assign_trials(const Session &s, const std::string &listener) {
  auto p = seeded_permutation(s.trials.size(), seed_for(s.config.seed, "trials:" + listener));
  p.resize(std::min(p.size(), s.config.trials_per_listener));
  return p;
}

std::vector<std::size_t> stimulus_order(const Session &s, const std::string &listener,
                                        std::size_t trial_index) {
  return seeded_permutation(
      s.trials.at(trial_index).stimuli.size(),
      seed_for(s.config.seed, "order:" + listener + ":" + s.trials[trial_index].trial_id));
}

}  // namespace rirbench::mushra
