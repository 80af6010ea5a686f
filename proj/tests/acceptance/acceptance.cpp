// tests/acceptance/acceptance.cpp

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

// Prints one PASS/FAIL line per acceptance criterion; exits non-zero if any
// criterion fails.

#include "httplib.h"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "rirbench/acoustics.hpp"
#include "rirbench/dsp.hpp"
#include "rirbench/embedding.hpp"
#include "rirbench/generator.hpp"
#include "rirbench/labeling.hpp"
#include "rirbench/mushra.hpp"
#include "rirbench/pipeline.hpp"
#include "rirbench/room.hpp"
#include "rirbench/speech.hpp"
#include "rirbench/util.hpp"
#include "rirbench/wav.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rirbench;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string &what) {
    if (!ok) {
      if (pass) detail << "first failure: " << what << "; ";
      pass = false;
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

// ------------------------------------------------------------ 1. RT60

void rt60_recovery(Outcome &o) {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::size_t cases = 0;
  for (double t : {0.2, 0.5, 1.0, 2.0})
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto rir = rirbench::testing::exponential_rir(t, 16000, 1.5 * t, seed);
      const double est = acoustics::rt60(rir).seconds;
      const double err = std::abs(est - t) / t;
      worst = std::max(worst, err);
      ++cases;
      o.require(err < 0.05, "T=" + fmt(t) + " seed " + std::to_string(seed) + " est " + fmt(est));
    }
  const double elapsed = seconds_since(t0);
  o.require(elapsed < 10.0, "runtime " + fmt(elapsed) + " s");
  o.detail << cases << " decays, worst error " << fmt(100 * worst, 3) << "% (limit 5%), " << fmt(elapsed, 3)
           << " s (limit 10 s)";
}

// ------------------------------------------------------------ 2. ISM vs Eyring

void ism_vs_eyring(Outcome &o) {
  const auto t0 = Clock::now();
  for (double alpha : {0.1, 0.3}) {
    auto room = room::ShoeboxRoom::uniform({6, 5, 3}, alpha);
    room.max_time = 3.0 * room::sabine_rt60(room);
    const int rate = 16000;
    const auto rir = room::simulate_shoebox(room, rate);
    const double measured = acoustics::rt60(rir).seconds;
    const double eyring = room::eyring_rt60(room);
    const double dev = (measured - eyring) / eyring;
    o.require(std::abs(dev) < 0.25, "alpha " + fmt(alpha) + ": measured " + fmt(measured) + " s vs Eyring " +
                                        fmt(eyring) + " s");

    double d2 = 0;
    for (int a = 0; a < 3; ++a) d2 += (room.source[a] - room.receiver[a]) * (room.source[a] - room.receiver[a]);
    const double d = std::sqrt(d2);
    const double delay = d * rate / room.speed_of_sound;
    const auto base = static_cast<long>(std::floor(delay));
    double amp = 0;
    const auto h = rir.channel(0);
    for (long k = base - room::kFractionalDelayHalfWidth + 1; k <= base + room::kFractionalDelayHalfWidth; ++k)
      if (k >= 0 && k < static_cast<long>(h.size())) amp += h[static_cast<std::size_t>(k)];
    const double want = 1.0 / (4.0 * std::numbers::pi * d);
    const double amp_dev = (amp - want) / want;
    o.require(std::abs(amp_dev) < 0.02, "alpha " + fmt(alpha) + ": direct path " + fmt(amp) + " vs " + fmt(want));
    o.detail << "alpha " << alpha << ": RT60 " << fmt(measured) << " s vs Eyring " << fmt(eyring) << " s ("
             << (dev >= 0 ? "+" : "") << fmt(100 * dev, 3) << "%, limit 25%), direct path "
             << fmt(100 * amp_dev, 2) << "% (limit 2%); ";
  }
  const double elapsed = seconds_since(t0);
  o.require(elapsed < 30.0, "runtime " + fmt(elapsed) + " s");
  o.detail << fmt(elapsed, 3) << " s (limit 30 s)";
}

// ------------------------------------------------------------ 3. convolution

void convolution_oracle(Outcome &o) {
  std::mt19937 rng(2024);
  double worst = 0;
  for (int k = 0; k < 200; ++k) {
    const std::size_t n = 1 + rng() % 4096, m = 1 + rng() % 512;
    const auto x = rirbench::testing::uniform_noise(n, 1000 + k);
    const auto h = rirbench::testing::uniform_noise(m, 5000 + k);
    const auto fast = audio::convolve(audio::AudioBuffer::mono(x, 16000), audio::ImpulseResponse::mono(h, 16000));
    const auto slow = rirbench::testing::direct_convolve(x, h);
    o.require(fast.frames() == slow.size(), "length mismatch");
    for (std::size_t i = 0; i < slow.size(); ++i) worst = std::max(worst, std::abs(fast.channel(0)[i] - slow[i]));
  }
  o.require(worst < 1e-6, "max abs diff " + fmt(worst));

  double delta_worst = 0;
  for (std::size_t shift : {0, 1, 17, 300}) {
    const auto x = rirbench::testing::uniform_noise(3000, 77 + shift);
    std::vector<double> d(shift + 1, 0.0);
    d[shift] = 1.0;
    const auto y = audio::convolve(audio::AudioBuffer::mono(x, 16000), audio::ImpulseResponse::mono(d, 16000));
    for (std::size_t i = 0; i < y.frames(); ++i) {
      const double want = (i >= shift && i - shift < x.size()) ? x[i - shift] : 0.0;
      delta_worst = std::max(delta_worst, std::abs(y.channel(0)[i] - want));
    }
  }
  o.require(delta_worst < 1e-7, "delta identity deviation " + fmt(delta_worst));
  o.detail << "200 pairs, max |fft - direct| " << fmt(worst, 3) << " (limit 1e-6); shifted-delta max deviation "
           << fmt(delta_worst, 3) << " (limit 1e-7)";
}

// ------------------------------------------------------------ 4. filter rule

void filter_rule(Outcome &o) {
  std::size_t cases = 0;
  std::vector<int> cur;
  std::function<void(std::size_t, int)> rec = [&](std::size_t size, int lo) {
    if (cur.size() == size) {
      int high = 0;
      for (int s : cur) high += s > 3;
      ++cases;
      o.require(labeling::filter_record(std::span<const int>(cur)) == (high >= 2), "multiset mismatch");
      return;
    }
    for (int v = lo; v <= 5; ++v) {
      cur.push_back(v);
      rec(size, v);
      cur.pop_back();
    }
  };
  for (std::size_t size = 0; size <= 4; ++size) rec(size, 1);
  o.require(cases == 126, "enumerated " + std::to_string(cases) + " multisets");
  o.detail << cases << " multisets of size 0..4 over 1..5 agree with count(>3) >= 2";
}

// ------------------------------------------------------------ 5. Wilcoxon

double enumerate_p(const std::vector<double> &d) {
  std::vector<double> nz;
  for (double v : d)
    if (v != 0) nz.push_back(v);
  std::vector<double> rank(nz.size());
  for (std::size_t i = 0; i < nz.size(); ++i) {
    double less = 0, equal = 0;
    for (double w : nz) {
      less += std::abs(w) < std::abs(nz[i]);
      equal += std::abs(w) == std::abs(nz[i]);
    }
    rank[i] = less + (equal + 1) / 2;
  }
  double observed = 0;
  for (std::size_t i = 0; i < nz.size(); ++i)
    if (nz[i] > 0) observed += rank[i];
  double le = 0, ge = 0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << nz.size()); ++mask) {
    double w = 0;
    for (std::size_t i = 0; i < nz.size(); ++i)
      if (mask >> i & 1) w += rank[i];
    le += w <= observed;
    ge += w >= observed;
  }
  return std::min(1.0, 2 * std::min(le, ge) / std::ldexp(1.0, static_cast<int>(nz.size())));
}

void wilcoxon(Outcome &o) {
  using speech::ZeroMethod;
  std::mt19937 rng(8);
  std::uniform_int_distribution<int> mag(1, 1000);
  double worst = 0, worst_oracle = 0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = 5 + rng() % 6;
    std::vector<double> d(n), zero(n, 0.0);
    for (auto &v : d) v = (rng() & 1) ? mag(rng) : -mag(rng);
    const auto exact = speech::wilcoxon_signed_rank(d, zero, ZeroMethod::kWilcoxDropZeros);
    const auto approx = speech::wilcoxon_signed_rank_approx(d, zero, ZeroMethod::kWilcoxDropZeros);
    worst = std::max(worst, std::abs(exact.p_value - approx.p_value));
    worst_oracle = std::max(worst_oracle, std::abs(exact.p_value - enumerate_p(d)));
    o.require(exact.exact, "exact path not taken");
  }
  o.require(worst < 0.05, "approx vs exact " + fmt(worst));
  o.require(worst_oracle < 1e-12, "exact vs enumeration " + fmt(worst_oracle));

  bool all_pos = true;
  for (std::size_t n = 5; n <= 10; ++n) {
    std::vector<double> d(n), zero(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) d[i] = static_cast<double>(i + 1);
    all_pos = all_pos && speech::wilcoxon_signed_rank(d, zero, ZeroMethod::kWilcoxDropZeros).p_value ==
                             2.0 / std::ldexp(1.0, static_cast<int>(n));
  }
  o.require(all_pos, "all-positive p != 2/2^n");

  std::mt19937 split_rng(2620);
  std::vector<double> d(2620, 0.0), zero(2620, 0.0);
  for (std::size_t i = 1608; i < d.size(); ++i) {
    const double m = 1 + static_cast<double>(split_rng() % 5);
    d[i] = (split_rng() % 100 < 55) ? m : -m;
  }
  std::shuffle(d.begin(), d.end(), split_rng);
  const auto pratt = speech::wilcoxon_signed_rank(d, zero, ZeroMethod::kPratt);
  const auto drop = speech::wilcoxon_signed_rank(d, zero, ZeroMethod::kWilcoxDropZeros);
  o.require(pratt.n == 2620 && pratt.n_zero == 1608, "pratt counts");
  o.require(drop.n == 2620 && drop.n_zero == 1608 && drop.n - drop.n_zero == 1012, "drop-zeros counts");
  o.detail << "100 cases n=5..10, max |approx - exact| " << fmt(worst, 3) << " (limit 0.05); all-positive p = 2/2^n "
           << (all_pos ? "holds" : "fails") << "; split n=" << pratt.n << " zeros=" << pratt.n_zero
           << " nonzero=" << drop.n - drop.n_zero << " (pratt p " << fmt(pratt.p_value, 3) << ", drop-zeros p "
           << fmt(drop.p_value, 3) << ")";
}

// ------------------------------------------------------------ 6. screening

void screening(Outcome &o) {
  auto listener = [](const std::string &id, std::size_t trials, std::size_t bad) {
    mushra::ListenerTrials l{id, {}};
    for (std::size_t k = 0; k < trials; ++k) l.hidden_reference_scores.push_back(k < bad ? 72 : 100);
    return l;
  };
  std::vector<mushra::ListenerTrials> ls;
  for (int i = 0; i < 17; ++i) ls.push_back(listener("l" + std::to_string(i), 30, static_cast<std::size_t>(i % 5)));
  ls.push_back(listener("x1", 30, 5));
  ls.push_back(listener("x2", 30, 5));
  const auto r = mushra::screen_listeners(std::span<const mushra::ListenerTrials>(ls));
  std::set<std::string> excluded;
  for (const auto &s : r)
    if (s.excluded) excluded.insert(s.listener_id);
  o.require(excluded == std::set<std::string>{"x1", "x2"}, "wrong exclusion set");
  const std::vector<mushra::ListenerTrials> edge{listener("edge", 20, 3)};
  const bool edge_kept = !mushra::screen_listeners(std::span<const mushra::ListenerTrials>(edge))[0].excluded;
  o.require(edge_kept, "3/20 excluded");
  o.detail << "19 listeners: " << excluded.size() << " excluded, " << ls.size() - excluded.size()
           << " retained; 3/20 violations " << (edge_kept ? "retained" : "excluded");
}

// ------------------------------------------------------------ 7. STOI

void stoi_properties(Outcome &o) {
  const int rate = 16000;
  const auto clean_v = rirbench::testing::speech_like(rate, 3.0, 4);
  const auto clean = audio::AudioBuffer::mono(clean_v, rate);
  const double self = speech::stoi(clean, clean);
  o.require(std::abs(self - 1.0) < 1e-6, "self " + fmt(self, 10));

  const auto noise = rirbench::testing::gaussian_noise(clean_v.size(), 5);
  double pc = 0, pn = 0;
  for (std::size_t i = 0; i < clean_v.size(); ++i) {
    pc += clean_v[i] * clean_v[i];
    pn += noise[i] * noise[i];
  }
  auto at_snr = [&](double snr) {
    const double g = std::sqrt(pc / (pn * std::pow(10.0, snr / 10.0)));
    std::vector<double> v(clean_v.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = clean_v[i] + g * noise[i];
    return v;
  };
  const auto noisy = at_snr(0.0);
  const double base = speech::stoi(clean, audio::AudioBuffer::mono(noisy, rate));
  double scale_dev = 0;
  for (double g : {0.25, 3.0}) {
    auto s = noisy;
    for (auto &v : s) v *= g;
    scale_dev = std::max(scale_dev, std::abs(speech::stoi(clean, audio::AudioBuffer::mono(s, rate)) - base));
  }
  o.require(scale_dev < 1e-6, "scale deviation " + fmt(scale_dev));

  std::vector<double> curve;
  for (double snr : {10.0, 0.0, -5.0, -10.0}) curve.push_back(speech::stoi(clean, audio::AudioBuffer::mono(at_snr(snr), rate)));
  bool monotone = true;
  for (std::size_t i = 1; i < curve.size(); ++i) monotone = monotone && curve[i] < curve[i - 1];
  o.require(monotone, "not monotone");
  o.detail << "self " << fmt(self, 12) << ", scale deviation " << fmt(scale_dev, 3) << ", SNR 10/0/-5/-10 dB -> "
           << fmt(curve[0]) << "/" << fmt(curve[1]) << "/" << fmt(curve[2]) << "/" << fmt(curve[3]);
}

// ------------------------------------------------------------ 8. WER

void wer_oracle(Outcome &o) {
  using Seq = std::vector<int>;
  auto hand = [&](const std::string &r, const std::string &h, std::size_t s, std::size_t d, std::size_t i,
                  double w) {
    const auto x = speech::wer(r, h);
    o.require(x.substitutions == s && x.deletions == d && x.insertions == i && x.wer == w,
              "hand case '" + r + "' vs '" + h + "'");
  };
  hand("a b c d e", "a b c d e", 0, 0, 0, 0.0);
  hand("a b c d", "a x c d", 1, 0, 0, 0.25);
  hand("a b c", "a c", 0, 1, 0, 1.0 / 3.0);
  hand("a c", "a b c", 0, 0, 1, 0.5);

  constexpr std::size_t kMax = 6;
  std::vector<Seq> seqs{{}};
  for (std::size_t i = 0; i < seqs.size(); ++i)
    if (seqs[i].size() < kMax)
      for (int t = 0; t < 3; ++t) {
        auto s = seqs[i];
        s.push_back(t);
        seqs.push_back(s);
      }
  auto code = [](const Seq &s) {
    std::size_t c = 0;
    for (auto it = s.rbegin(); it != s.rend(); ++it) c = c * 4 + static_cast<std::size_t>(*it + 1);
    return c;
  };
  const char *names[3] = {"red", "green", "blue"};
  auto words = [&](const Seq &s) {
    std::vector<std::string> w;
    for (int t : s) w.emplace_back(names[t]);
    return w;
  };
  std::size_t pairs = 0, mismatches = 0;
  for (const auto &ref : seqs) {
    if (ref.empty()) continue;
    // Shortest single-token edit paths from ref.
    std::vector<int> dist(std::size_t{1} << (2 * (kMax + 1)), -1);
    std::deque<Seq> q{ref};
    dist[code(ref)] = 0;
    while (!q.empty()) {
      const Seq s = q.front();
      q.pop_front();
      const int nd = dist[code(s)] + 1;
      auto visit = [&](const Seq &t) {
        if (dist[code(t)] < 0) {
          dist[code(t)] = nd;
          q.push_back(t);
        }
      };
      for (std::size_t i = 0; i < s.size(); ++i) {
        Seq del = s;
        del.erase(del.begin() + static_cast<std::ptrdiff_t>(i));
        visit(del);
        for (int t = 0; t < 3; ++t)
          if (t != s[i]) {
            Seq sub = s;
            sub[i] = t;
            visit(sub);
          }
      }
      if (s.size() < kMax)
        for (std::size_t i = 0; i <= s.size(); ++i)
          for (int t = 0; t < 3; ++t) {
            Seq ins = s;
            ins.insert(ins.begin() + static_cast<std::ptrdiff_t>(i), t);
            visit(ins);
          }
    }
    const auto rw = words(ref);
    for (const auto &hyp : seqs) {
      const auto hw = words(hyp);
      const auto r = speech::wer(std::span<const std::string>(rw), std::span<const std::string>(hw));
      mismatches += static_cast<int>(r.errors()) != dist[code(hyp)];
      ++pairs;
    }
  }
  o.require(mismatches == 0, std::to_string(mismatches) + " oracle mismatches");
  o.detail << "4 hand cases exact; " << pairs << " sequence pairs (<= 6 tokens, 3 words) match the shortest-edit-path oracle";
}

// ------------------------------------------------------------ 9. end to end

std::string file_digest(const fs::path &dir) {
  std::vector<fs::path> files;
  for (const auto &e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), dir));
  std::sort(files.begin(), files.end());
  std::string all;
  for (const auto &f : files) all += f.string() + ":" + sha256_hex(read_text_file(dir / f)) + "\n";
  return all;
}

// label -> refine -> generate -> evaluate with scripted endpoints; every
// artifact lands in `out`.
void run_pipeline(const fs::path &out) {
  using labeling::ScriptedChatEndpoint;
  fs::create_directories(out);
  const std::vector<std::pair<std::string, std::string>> rooms{
      {"5 by 4 by 3", "moderate"}, {"4 by 3 by 2.5", "absorptive"}, {"6 by 4 by 3", "very absorptive"}};
  std::vector<labeling::DatasetRecord> records;
  json cap_rules = json::array(), fuse_rules = json::array();
  for (std::size_t i = 0; i < rooms.size(); ++i) {
    labeling::DatasetRecord r;
    r.id = "rec" + std::to_string(i);
    r.room_id = "room" + std::to_string(i);
    r.rir_path = "rir/" + r.id + ".wav";
    r.image_ref = "img/" + r.id + ".png";
    r.metadata = {{"size", rooms[i].first}, {"finish", rooms[i].second}};
    records.push_back(r);
    cap_rules.push_back({{"contains", r.image_ref},
                         {"reply", "marker-" + r.id + ": a room of " + rooms[i].first + " meters"}});
    fuse_rules.push_back({{"contains", "marker-" + r.id + ":"},
                          {"reply", "A room " + rooms[i].first + " meters with " + rooms[i].second +
                                        " absorption and plain walls."}});
  }
  labeling::LabelingEndpoints eps;
  for (const char *m : {"cap-a", "cap-b"})
    eps.captioners.push_back(std::make_shared<ScriptedChatEndpoint>(json{{"name", m}, {"rules", cap_rules}}));
  eps.judge = std::make_shared<ScriptedChatEndpoint>(json{{"name", "judge"}, {"default", "Score: 5"}});
  eps.fuser = std::make_shared<ScriptedChatEndpoint>(json{{"name", "fuser"}, {"rules", fuse_rules}});
  const auto templates = labeling::PromptTemplates::defaults();
  const auto labeled = labeling::run_labeling(records, eps, templates, 2);
  labeling::write_manifest(out / "labeled.jsonl", labeled.records);
  write_text_file(out / "labeling_stats.json", labeling::to_json(labeled.stats).dump(2));

  ScriptedChatEndpoint refiner(json{{"name", "llm"}, {"default", "{{user}}"}});
  std::vector<labeling::IclExample> examples;
  for (int i = 0; i < 5; ++i) examples.push_back({"raw caption " + std::to_string(i), "refined " + std::to_string(i)});
  room::IsmBaselineGenerator gen;
  fs::create_directories(out / "rir");
  std::ofstream rt60_manifest(out / "rt60.jsonl");
  std::ofstream embed_pairs(out / "pairs.jsonl");
  for (const auto &r : labeled.records) {
    if (!r.final_prompt) throw AnalysisError("record " + r.id + " not labeled");
    const auto refined = labeling::refine_prompt_icl(refiner, *r.final_prompt, examples, templates);
    const auto g = gen.generate({refined.standardized_prompt, 3, 16000});
    audio::write_wav(out / "rir" / (r.id + ".wav"), audio::AudioBuffer(g.rir), audio::WavFormat::kFloat32);
    rt60_manifest << json{{"id", r.id}, {"prompt", refined.standardized_prompt}, {"gt_rir", "rir/" + r.id + ".wav"}}.dump()
                  << "\n";
    embed_pairs << json{{"id", r.id}, {"reference", *r.final_prompt}, {"raw", r.captions.front().caption},
                        {"refined", refined.standardized_prompt}}
                       .dump()
                << "\n";
  }
  rt60_manifest.close();
  embed_pairs.close();
  const auto items = pipeline::read_rt60_manifest(out / "rt60.jsonl");
  write_text_file(out / "rt60_report.json",
                  pipeline::eval_rt60(items, gen, {16000, 3, 2}, pipeline::run_id({{"fixture", 1}})).dump(2));
  embedding::HashingEmbeddingEndpoint embed(256);
  write_text_file(out / "embed_report.json",
                  pipeline::eval_embed(pipeline::read_embed_pairs(out / "pairs.jsonl"), embed, 2).dump(2));
}

void end_to_end(Outcome &o) {
  const auto dir = rirbench::testing::temp_dir("acceptance-e2e");
  // Closed loop: baseline ground truths at 48 kHz, evaluated at 16 kHz.
  const char *prompts[] = {"room 6 by 5 by 3 meters, alpha 0.3", "room 5 by 4 by 3 meters, moderate absorption",
                           "room 4 by 3 by 2.5 meters, absorptive absorption",
                           "room 8 by 6 by 3.5 meters, very absorptive absorption"};
  room::IsmBaselineGenerator gen;
  std::ofstream manifest(dir / "gt.jsonl");
  for (std::size_t i = 0; i < std::size(prompts); ++i) {
    const auto g = gen.generate({prompts[i], 1, 48000});
    const std::string file = "gt" + std::to_string(i) + ".wav";
    audio::write_wav(dir / file, audio::AudioBuffer(g.rir), audio::WavFormat::kFloat32);
    manifest << json{{"id", "g" + std::to_string(i)}, {"prompt", prompts[i]}, {"gt_rir", file}}.dump() << "\n";
  }
  manifest.close();
  const auto report = pipeline::eval_rt60(pipeline::read_rt60_manifest(dir / "gt.jsonl"), gen, {16000, 1, 2}, "loop");
  double mean_abs = 0;
  for (const auto &row : report["per_sample"]) mean_abs += std::abs(row["error_pct"].get<double>());
  mean_abs /= static_cast<double>(report["per_sample"].size());
  o.require(report["n"] == std::size(prompts), "items failed in the closed loop");
  o.require(mean_abs < 5.0, "mean |error| " + fmt(mean_abs) + "%");
  o.require(report.contains("mean_error_pct") && report.contains("median_error_pct") &&
                report.contains("per_sample"),
            "report lacks table columns");

  run_pipeline(dir / "run1");
  run_pipeline(dir / "run2");
  const auto a = file_digest(dir / "run1"), b = file_digest(dir / "run2");
  o.require(!a.empty() && a == b, "re-run outputs differ");
  const auto stats = json::parse(read_text_file(dir / "run1" / "labeling_stats.json"));
  o.require(stats["kept"] == 3, "labeling kept " + stats["kept"].dump());
  const auto rt = json::parse(read_text_file(dir / "run1" / "rt60_report.json"));
  o.require(rt["n"] == 3, "pipeline rt60 evaluated " + rt["n"].dump());
  std::size_t files = 0;
  for (char c : a) files += c == '\n';
  o.detail << "closed loop mean |error| " << fmt(mean_abs, 3) << "% over " << report["n"].get<int>()
           << " rooms (limit 5%), mean " << fmt(report["mean_error_pct"].get<double>(), 3) << "%, median "
           << fmt(report["median_error_pct"].get<double>(), 3) << "%; mock pipeline " << files
           << " artifacts byte-identical on re-run";
  fs::remove_all(dir);
}

// ------------------------------------------------------------ 10. listening-test API

void mushra_api(Outcome &o) {
  const auto dir = rirbench::testing::temp_dir("acceptance-mushra");
  const int rate = 16000;
  fs::create_directories(dir / "a");
  std::ofstream manifest(dir / "m.jsonl");
  for (int i = 0; i < 4; ++i) {
    const std::string id = "it" + std::to_string(i);
    auto put = [&](const std::string &name, const audio::AudioBuffer &b) {
      audio::write_wav(dir / "a" / name, b, audio::WavFormat::kFloat32);
      return "a/" + name;
    };
    manifest << json{{"id", id},
                     {"clean", put(id + "c.wav", audio::AudioBuffer::mono(rirbench::testing::speech_like(rate, 0.3, i), rate))},
                     {"gt_rir", put(id + "g.wav", audio::AudioBuffer(rirbench::testing::exponential_rir(0.3, rate, 0.1, 10 + i)))},
                     {"systems",
                      {{"proposed", put(id + "p.wav", audio::AudioBuffer(rirbench::testing::exponential_rir(0.5, rate, 0.1, 20 + i)))},
                       {"baseline", put(id + "b.wav", audio::AudioBuffer(rirbench::testing::exponential_rir(0.2, rate, 0.1, 30 + i)))}}},
                     {"prompt", "a tiled kitchen"}}
                    .dump()
             << "\n";
  }
  manifest.close();
  auto service = std::make_shared<mushra::MushraService>(dir / "root");
  mushra::MushraServer server(service);  // no UI bundle mounted
  const int port = server.start("127.0.0.1", 0);
  httplib::Client cli("127.0.0.1", port);
  auto post = [&](const std::string &path, const json &body) {
    auto r = cli.Post(path, body.dump(), "application/json");
    return r ? std::make_pair(r->status, json::parse(r->body)) : std::make_pair(-1, json());
  };
  auto get = [&](const std::string &path) {
    auto r = cli.Get(path);
    return r ? std::make_pair(r->status, r->body) : std::make_pair(-1, std::string());
  };

  const auto created = post("/api/sessions", {{"manifest_ref", (dir / "m.jsonl").string()}, {"seed", 5}, {"trials_per_listener", 4}});
  o.require(created.first == 201, "create status " + std::to_string(created.first));
  const std::string sid = created.second.value("session_id", "");
  const auto session = service->session(sid);
  std::map<std::string, std::string> cond_of;
  for (const auto &t : session.trials)
    for (const auto &x : t.stimuli) cond_of[x.id] = x.condition;

  std::size_t validation = 0, idempotency = 0, blind_payloads = 0;
  bool blind = true;
  const std::vector<std::string> labels{mushra::kHiddenReference, mushra::kAnchor, "proposed", "baseline", "condition"};
  for (const std::string who : {"ann", "ben", "cai"}) {
    for (int guard = 0; guard < 10; ++guard) {
      const auto [st, body] = get("/api/sessions/" + sid + "/listeners/" + who + "/next");
      o.require(st == 200, "next status");
      for (const auto &l : labels) blind = blind && body.find(l) == std::string::npos;
      ++blind_payloads;
      const auto next = json::parse(body);
      if (next["done"] == true) break;
      const auto &trial = next["trial"];
      json scores = json::array();
      for (const auto &x : trial["stimuli"]) {
        const std::string id = x["stimulus_id"];
        const auto &c = cond_of[id];
        int v = c == mushra::kHiddenReference ? (who == "cai" ? 60 : 98)
                : c == mushra::kAnchor        ? 20
                : c == "proposed"             ? 70 + guard
                                              : 50 + guard;
        scores.push_back({{"stimulus_id", id}, {"score", v}});
      }
      json body_all{{"listener", who}, {"trial", trial["trial_id"]}, {"scores", scores}};
      json partial = body_all;
      partial["scores"].erase(partial["scores"].begin());
      const auto miss = post("/api/ratings", partial);
      validation += miss.first == 422 && miss.second["ids"] == json::array({scores[0]["stimulus_id"]});
      json unknown = body_all;
      unknown["scores"].push_back({{"stimulus_id", "xnope"}, {"score", 1}});
      validation += post("/api/ratings", unknown).first == 404;
      o.require(post("/api/ratings", body_all).first == 200, "store failed");
      const auto log_before = read_text_file(session.dir / "ratings.jsonl");
      const auto dup = post("/api/ratings", body_all);
      idempotency += dup.first == 200 && dup.second["status"] == "duplicate" &&
                     read_text_file(session.dir / "ratings.jsonl") == log_before;
    }
  }
  o.require(validation == 24, "validation checks " + std::to_string(validation) + "/24");
  o.require(idempotency == 12, "idempotency checks " + std::to_string(idempotency) + "/12");
  o.require(blind, "condition label leaked");

  // Recompute the table from the raw log alone.
  std::map<std::string, std::size_t> below, trials;
  const auto rows = read_jsonl(session.dir / "ratings.jsonl");
  for (const auto &r : rows)
    if (cond_of[r["stimulus_id"]] == mushra::kHiddenReference) {
      ++trials[r["listener_id"]];
      below[r["listener_id"]] += r["score"].get<int>() < 90;
    }
  std::map<std::string, std::pair<double, int>> sums;
  for (const auto &r : rows) {
    const std::string l = r["listener_id"];
    if (below[l] * 100 > trials[l] * 15) continue;
    auto &acc = sums[cond_of[r["stimulus_id"]]];
    acc.first += r["score"].get<int>();
    ++acc.second;
  }
  const auto report = json::parse(get("/api/sessions/" + sid + "/report").second);
  bool recomputed = report["n_retained"] == 2;
  for (const auto &row : report["conditions"]) {
    const auto &acc = sums[row["condition"]];
    recomputed = recomputed && row["mean"].get<double>() == acc.first / acc.second;
  }
  o.require(recomputed, "report differs from log recomputation");
  o.require(get("/").first == 404, "unexpected content without a UI bundle");
  server.stop();
  o.detail << validation << " validation checks (422 with missing ids, 404 unknown), " << idempotency
           << " duplicate submissions left the log unchanged, " << blind_payloads
           << " payloads blind, report means recomputed from " << rows.size() << " logged ratings";
  fs::remove_all(dir);
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);
  const std::vector<std::pair<std::string, std::function<void(Outcome &)>>> criteria{
      {"rt60-recovery", rt60_recovery},   {"ism-vs-eyring", ism_vs_eyring}, {"convolution-oracle", convolution_oracle},
      {"filter-rule", filter_rule},       {"wilcoxon", wilcoxon},           {"mushra-screening", screening},
      {"stoi", stoi_properties},          {"wer", wer_oracle},              {"end-to-end", end_to_end},
      {"mushra-api-contract", mushra_api}};
  int failed = 0;
  for (const auto &[name, fn] : criteria) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      fn(o);
    } catch (const std::exception &e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    failed += !o.pass;
    std::printf("%s %-20s %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.str().c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
