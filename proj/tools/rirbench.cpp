// tools/rirbench.cpp

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

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "rirbench/acoustics.hpp"
#include "rirbench/chat.hpp"
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

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rirbench;

namespace {

constexpr const char *kVersion = "0.1.0";

struct Globals {
  bool json_errors = false;
  std::string log_level = "warn";
  std::uint64_t seed = 0;
  std::size_t jobs = 4;
  std::string api_key;
  int retries = 3;
  int backoff_ms = 1000;
  std::string cache;
};

RetryPolicy retry_policy(const Globals &g) {
  return RetryPolicy{g.retries, std::chrono::milliseconds(g.backoff_ms), 2.0};
}

std::shared_ptr<ResponseCache> open_cache(const Globals &g) {
  return g.cache.empty() ? nullptr : std::make_shared<ResponseCache>(g.cache);
}

room::Vec3 parse_vec3(const std::string &text, const char *field) {
  room::Vec3 v{};
  std::string s = text;
  for (char &c : s)
    if (c == ',' || c == 'x' || c == 'X') c = ' ';
  std::istringstream in(s);
  for (double &e : v)
    if (!(in >> e)) throw ParameterError(field, "expected three numbers, got '" + text + "'");
  std::string rest;
  if (in >> rest) throw ParameterError(field, "expected three numbers, got '" + text + "'");
  return v;
}

/// Emits JSON to `out` (or stdout) and the config snapshot beside it.
void emit_json(const json &doc, const std::string &out, const json &config) {
  if (out.empty()) {
    std::cout << doc.dump(2) << "\n";
    return;
  }
  write_text_file(out, doc.dump(2) + "\n");
  write_text_file(out + ".config.json", config.dump(2) + "\n");
}

void emit_snapshot(const std::string &out, const json &config) {
  write_text_file(out + ".config.json", config.dump(2) + "\n");
}

json snapshot(const std::string &command, const Globals &g, json args) {
  return {{"command", command},
          {"version", kVersion},
          {"seed", g.seed},
          {"jobs", g.jobs},
          {"retries", g.retries},
          {"cache", g.cache},
          {"args", std::move(args)}};
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"rirbench: room impulse response labeling, generation and evaluation workbench"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Globals g;
  app.add_flag("--json", g.json_errors, "Machine-readable error JSON on stderr");
  app.add_option("--log-level", g.log_level, "trace|debug|info|warn|error|off")->capture_default_str();
  app.add_option("--seed", g.seed, "Seed for every random choice in the run")->capture_default_str();
  app.add_option("--jobs,-j", g.jobs, "Bounded parallelism")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--api-key", g.api_key, "Bearer token for remote endpoints")->envname("RIRBENCH_API_KEY");
  app.add_option("--retries", g.retries, "Attempts per endpoint call")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--backoff-ms", g.backoff_ms, "Initial retry backoff")->capture_default_str();
  app.add_option("--cache", g.cache, "Append-only JSONL response cache")->envname("RIRBENCH_CACHE");

  // analyze
  auto *analyze = app.add_subcommand("analyze", "Acoustic parameters of an RIR");
  std::string an_in, an_out;
  analyze->add_option("rir", an_in, "RIR WAV")->required()->check(CLI::ExistingFile);
  analyze->add_option("-o,--out", an_out, "Output JSON (default stdout)");

  // simulate
  auto *simulate = app.add_subcommand("simulate", "Shoebox image-source RIR");
  std::string sim_dims, sim_src, sim_rcv, sim_out, sim_fmt = "float32";
  double sim_alpha = 0.0, sim_max_time = 0.0;
  int sim_rate = 16000, sim_order = -1;
  simulate->add_option("--dims", sim_dims, "L,W,H in meters")->required();
  simulate->add_option("--alpha", sim_alpha, "Uniform absorption in (0, 1]")->required();
  simulate->add_option("--source", sim_src, "x,y,z (default 1/3 of dims)");
  simulate->add_option("--receiver", sim_rcv, "x,y,z (default 2/3 of dims)");
  simulate->add_option("--rate", sim_rate, "Sample rate")->capture_default_str();
  simulate->add_option("--max-order", sim_order, "Reflection order bound");
  simulate->add_option("--max-time", sim_max_time, "Image delay bound in seconds (default 3 x Sabine)");
  simulate->add_option("--format", sim_fmt, "pcm16|float32")->capture_default_str();
  simulate->add_option("-o,--out", sim_out, "Output WAV")->required();

  // generate
  auto *generate = app.add_subcommand("generate", "RIR from a text prompt through a generator");
  std::string gen_prompt, gen_generator = "ism", gen_out;
  int gen_rate = 16000;
  generate->add_option("prompt", gen_prompt, "Prompt text")->required();
  generate->add_option("--generator", gen_generator, "ism or a generator URL")
      ->envname("RIRBENCH_GENERATOR")->capture_default_str();
  generate->add_option("--rate", gen_rate, "Sample rate")->capture_default_str();
  generate->add_option("-o,--out", gen_out, "Output WAV")->required();

  // convolve
  auto *convolve = app.add_subcommand("convolve", "Convolve speech with an RIR");
  std::string cv_speech, cv_rir, cv_out, cv_fmt = "float32";
  bool cv_resample = false;
  convolve->add_option("speech", cv_speech, "Speech WAV")->required()->check(CLI::ExistingFile);
  convolve->add_option("rir", cv_rir, "RIR WAV")->required()->check(CLI::ExistingFile);
  convolve->add_flag("--resample-rir", cv_resample, "Resample the RIR to the speech rate first");
  convolve->add_option("--format", cv_fmt, "pcm16|float32")->capture_default_str();
  convolve->add_option("-o,--out", cv_out, "Output WAV")->required();

  // label
  auto *label = app.add_subcommand("label", "Caption, judge, filter and fuse a manifest");
  std::string lb_in, lb_out, lb_judge, lb_fuser, lb_prompts;
  std::vector<std::string> lb_captioners;
  label->add_option("manifest", lb_in, "Input JSONL manifest")->required()->check(CLI::ExistingFile);
  label->add_option("--captioners", lb_captioners, "[name=]mock:<file> or [name=]http(s)://...")
      ->required()->expected(2, -1);
  label->add_option("--judge", lb_judge, "Judge endpoint")->required()->envname("RIRBENCH_JUDGE");
  label->add_option("--fuser", lb_fuser, "Fusion endpoint")->required()->envname("RIRBENCH_FUSER");
  label->add_option("--prompts", lb_prompts, "Directory of prompt templates")->check(CLI::ExistingDirectory);
  label->add_option("-o,--out", lb_out, "Labeled JSONL manifest")->required();

  // refine
  auto *refine = app.add_subcommand("refine", "Rewrite a free-form prompt in the standardized format");
  std::string rf_text, rf_examples, rf_endpoint, rf_prompts, rf_out;
  refine->add_option("text", rf_text, "Free-form prompt")->required();
  refine->add_option("--examples", rf_examples, "Five raw/refined example pairs (JSON or JSONL)")
      ->required()->check(CLI::ExistingFile);
  refine->add_option("--endpoint", rf_endpoint, "Chat endpoint")->required()->envname("RIRBENCH_REFINER");
  refine->add_option("--prompts", rf_prompts, "Directory of prompt templates")->check(CLI::ExistingDirectory);
  refine->add_option("-o,--out", rf_out, "Write both stages as JSON here");

  // eval-rt60
  auto *ev_rt60 = app.add_subcommand("eval-rt60", "RT60 error report for a generator");
  std::string er_in, er_gen = "ism", er_out;
  int er_rate = 16000;
  ev_rt60->add_option("manifest", er_in, "JSONL {id, prompt, gt_rir}")->required()->check(CLI::ExistingFile);
  ev_rt60->add_option("--generator", er_gen, "ism or a generator URL")
      ->envname("RIRBENCH_GENERATOR")->capture_default_str();
  ev_rt60->add_option("--rate", er_rate, "Common analysis rate")->capture_default_str();
  ev_rt60->add_option("-o,--out", er_out, "Report JSON (default stdout)");

  // eval-embed
  auto *ev_embed = app.add_subcommand("eval-embed", "Prompt embedding similarity report");
  std::string ee_in, ee_endpoint, ee_out;
  ev_embed->add_option("pairs", ee_in, "JSONL {id, reference, raw, refined}")->required()->check(CLI::ExistingFile);
  ev_embed->add_option("--endpoint", ee_endpoint, "hash:<dim>, [name=]mock:<file> or URL")
      ->required()->envname("RIRBENCH_EMBEDDING");
  ev_embed->add_option("-o,--out", ee_out, "Report JSON (default stdout)");

  // eval-speech
  auto *ev_speech = app.add_subcommand("eval-speech", "WER / STOI report on reverberant speech");
  std::string es_in, es_asr, es_transcripts, es_pesq, es_out;
  ev_speech->add_option("manifest", es_in, "JSONL {id, clean, gt_rir, generated_rir, transcript?}")
      ->required()->check(CLI::ExistingFile);
  ev_speech->add_option("--asr", es_asr, "mock, replay:<tsv> or URL")->required()->envname("RIRBENCH_ASR");
  ev_speech->add_option("--transcripts", es_transcripts, "TSV or directory of reference transcripts");
  ev_speech->add_option("--pesq", es_pesq, "TSV of externally computed PESQ scores");
  ev_speech->add_option("-o,--out", es_out, "Report JSON (default stdout)");

  // mushra
  auto *mushra_cmd = app.add_subcommand("mushra", "Listening-test service");
  mushra_cmd->require_subcommand(1);
  auto *ms_serve = mushra_cmd->add_subcommand("serve", "Build sessions from a config and serve the API");
  std::string ms_config, ms_host = "127.0.0.1";
  int ms_port = 8080;
  ms_serve->add_option("config", ms_config, "JSON {root, sessions: [...], static_dir?}")
      ->required()->check(CLI::ExistingFile);
  ms_serve->add_option("--host", ms_host)->capture_default_str();
  ms_serve->add_option("--port", ms_port)->capture_default_str();
  auto *ms_report = mushra_cmd->add_subcommand("report", "Screening and statistics of a session");
  std::string mr_root, mr_session, mr_agg = "pooled", mr_out;
  ms_report->add_option("root", mr_root, "Service root directory")->required()->check(CLI::ExistingDirectory);
  ms_report->add_option("--session", mr_session, "Session id (default: the only session)");
  ms_report->add_option("--aggregation", mr_agg, "pooled|per_listener")->capture_default_str();
  ms_report->add_option("-o,--out", mr_out, "Report JSON (default stdout)");

  // serve-generator
  auto *serve_gen = app.add_subcommand("serve-generator", "Expose a generator over HTTP");
  std::string sg_gen = "ism", sg_host = "127.0.0.1";
  int sg_port = 8090;
  serve_gen->add_option("--generator", sg_gen, "ism or a generator URL to proxy")->capture_default_str();
  serve_gen->add_option("--host", sg_host)->capture_default_str();
  serve_gen->add_option("--port", sg_port)->capture_default_str();

  // split
  auto *split = app.add_subcommand("split", "Room-disjoint train/test split of a manifest");
  std::string sp_in, sp_train, sp_test;
  std::vector<std::string> sp_rooms;
  split->add_option("manifest", sp_in)->required()->check(CLI::ExistingFile);
  split->add_option("--test-rooms", sp_rooms, "room_id values for the test side")->required()->delimiter(',');
  split->add_option("--train-out", sp_train)->required();
  split->add_option("--test-out", sp_test)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    if (g.json_errors)
      std::cerr << json{{"error", e.what()}, {"kind", "usage"}, {"exit_code", 1}}.dump() << "\n";
    else
      app.exit(e);
    return 1;
  }

  auto logger = spdlog::stderr_color_mt("rirbench");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(g.log_level));

  try {
    if (*analyze) {
      const auto params = acoustics::analyze(audio::read_rir(an_in));
      emit_json(acoustics::to_json(params), an_out, snapshot("analyze", g, {{"rir", an_in}}));
    } else if (*simulate) {
      auto room = room::ShoeboxRoom::uniform(parse_vec3(sim_dims, "dims"), sim_alpha);
      if (!sim_src.empty()) room.source = parse_vec3(sim_src, "source");
      if (!sim_rcv.empty()) room.receiver = parse_vec3(sim_rcv, "receiver");
      if (sim_order >= 0) room.max_order = sim_order;
      if (sim_max_time > 0) room.max_time = sim_max_time;
      else if (!room.max_order) room.max_time = 3.0 * room::sabine_rt60(room);
      const auto rir = room::simulate_shoebox(room, sim_rate);
      const auto res = audio::write_wav(sim_out, audio::AudioBuffer(rir), audio::parse_wav_format(sim_fmt));
      json meta{{"room", room::to_json(room)}, {"sabine_rt60", room::sabine_rt60(room)},
                {"eyring_rt60", room::eyring_rt60(room)}, {"sample_rate", sim_rate},
                {"frames", rir.frames()}, {"clip_count", res.clip_count}};
      write_text_file(sim_out + ".json", meta.dump(2) + "\n");
      emit_snapshot(sim_out, snapshot("simulate", g, {{"dims", sim_dims}, {"alpha", sim_alpha},
                                                      {"source", sim_src}, {"receiver", sim_rcv},
                                                      {"rate", sim_rate}, {"max_order", sim_order},
                                                      {"max_time", sim_max_time}, {"format", sim_fmt}}));
      std::cout << meta.dump(2) << "\n";
    } else if (*generate) {
      auto gen = room::make_generator(gen_generator);
      const auto out = gen->generate({gen_prompt, g.seed, gen_rate});
      audio::write_wav(gen_out, audio::AudioBuffer(out.rir), audio::WavFormat::kFloat32);
      write_text_file(gen_out + ".json", out.metadata.dump(2) + "\n");
      emit_snapshot(gen_out, snapshot("generate", g, {{"prompt", gen_prompt},
                                                      {"generator", gen_generator}, {"rate", gen_rate}}));
      std::cout << out.metadata.dump(2) << "\n";
    } else if (*convolve) {
      const auto speech = audio::read_wav(cv_speech);
      auto rir = audio::read_rir(cv_rir);
      if (cv_resample && rir.sample_rate() != speech.sample_rate())
        rir = audio::resample(rir, speech.sample_rate());
      const auto wet = audio::convolve(speech, rir);
      const auto res = audio::write_wav(cv_out, wet, audio::parse_wav_format(cv_fmt));
      if (res.clip_count > 0) spdlog::warn("{} samples clipped while writing {}", res.clip_count, cv_out);
      emit_snapshot(cv_out, snapshot("convolve", g, {{"speech", cv_speech}, {"rir", cv_rir},
                                                     {"resample_rir", cv_resample}, {"format", cv_fmt}}));
      std::cout << json{{"frames", wet.frames()}, {"sample_rate", wet.sample_rate()},
                        {"channels", wet.num_channels()}, {"clip_count", res.clip_count}}.dump(2)
                << "\n";
    } else if (*label) {
      labeling::EndpointOptions opts{g.api_key, retry_policy(g), open_cache(g)};
      labeling::LabelingEndpoints eps;
      for (const auto &c : lb_captioners) eps.captioners.push_back(labeling::make_chat_endpoint(c, opts));
      eps.judge = labeling::make_chat_endpoint(lb_judge, opts);
      eps.fuser = labeling::make_chat_endpoint(lb_fuser, opts);
      const auto templates = lb_prompts.empty() ? labeling::PromptTemplates::defaults()
                                                : labeling::PromptTemplates::load(lb_prompts);
      auto result = labeling::run_labeling(labeling::read_manifest(lb_in), eps, templates, g.jobs);
      labeling::write_manifest(lb_out, result.records);
      const auto stats = labeling::to_json(result.stats);
      write_text_file(lb_out + ".stats.json", stats.dump(2) + "\n");
      emit_snapshot(lb_out, snapshot("label", g, {{"manifest", lb_in}, {"captioners", lb_captioners},
                                                  {"judge", lb_judge}, {"fuser", lb_fuser},
                                                  {"prompts", lb_prompts}}));
      std::cout << stats.dump(2) << "\n";
    } else if (*refine) {
      labeling::EndpointOptions opts{g.api_key, retry_policy(g), open_cache(g)};
      auto ep = labeling::make_chat_endpoint(rf_endpoint, opts);
      const auto templates = rf_prompts.empty() ? labeling::PromptTemplates::defaults()
                                                : labeling::PromptTemplates::load(rf_prompts);
      const auto examples = labeling::load_icl_examples(rf_examples);
      const auto r = labeling::refine_prompt_icl(*ep, rf_text, examples, templates);
      if (!rf_out.empty())
        emit_json(json{{"intermediate_caption", r.intermediate_caption},
                   {"standardized_prompt", r.standardized_prompt}},
                  rf_out, snapshot("refine", g, {{"text", rf_text}, {"examples", rf_examples},
                                                 {"endpoint", rf_endpoint}}));
      std::cout << r.standardized_prompt << "\n";
    } else if (*ev_rt60) {
      auto gen = room::make_generator(er_gen);
      const auto items = pipeline::read_rt60_manifest(er_in);
      const std::string id = pipeline::run_id({{"manifest", sha256_hex(read_text_file(er_in))},
                                               {"generator", gen->name()},
                                               {"seed", g.seed},
                                               {"rate", er_rate}});
      const auto report = pipeline::eval_rt60(items, *gen, {er_rate, g.seed, g.jobs}, id);
      emit_json(report, er_out, snapshot("eval-rt60", g, {{"manifest", er_in}, {"generator", er_gen},
                                                          {"rate", er_rate}}));
    } else if (*ev_embed) {
      auto ep = embedding::make_embedding_endpoint(ee_endpoint, g.api_key, retry_policy(g), open_cache(g));
      const auto report = pipeline::eval_embed(pipeline::read_embed_pairs(ee_in), *ep, g.jobs);
      emit_json(report, ee_out, snapshot("eval-embed", g, {{"pairs", ee_in}, {"endpoint", ee_endpoint}}));
    } else if (*ev_speech) {
      std::map<std::string, std::string> transcripts;
      if (!es_transcripts.empty()) transcripts = speech::load_transcripts(es_transcripts);
      const auto items = pipeline::read_speech_manifest(es_in, transcripts);
      std::map<std::string, std::string> refs;
      for (const auto &it : items) refs[it.id] = it.transcript;
      auto asr = speech::make_asr_endpoint(es_asr, refs, g.api_key, retry_policy(g));
      auto report = speech::speech_report(items, *asr, g.jobs);
      if (!es_pesq.empty()) pipeline::load_pesq(es_pesq, report);
      emit_json(speech::to_json(report), es_out,
                snapshot("eval-speech", g, {{"manifest", es_in}, {"asr", es_asr},
                                            {"transcripts", es_transcripts}, {"pesq", es_pesq}}));
    } else if (*ms_serve) {
      const auto cfg = json::parse(read_text_file(ms_config));
      const fs::path base = fs::path(ms_config).parent_path();
      const fs::path root = resolve_path(base, cfg.value("root", std::string("mushra-data")));
      auto service = std::make_shared<mushra::MushraService>(root);
      for (auto s : cfg.value("sessions", json::array())) {
        if (s.contains("manifest_ref"))
          s["manifest_ref"] = resolve_path(base, s["manifest_ref"].get<std::string>()).string();
        const auto created = service->create_session(s);
        std::cerr << "session " << created["session_id"].get<std::string>() << " ready\n";
      }
      std::optional<fs::path> static_dir;
      if (cfg.contains("static_dir")) static_dir = resolve_path(base, cfg["static_dir"].get<std::string>());
      mushra::MushraServer server(service, static_dir);
      server.listen(ms_host, ms_port);
    } else if (*ms_report) {
      mushra::MushraService service(mr_root);
      std::string sid = mr_session;
      if (sid.empty()) {
        const auto ids = service.session_ids();
        if (ids.size() != 1)
          throw PreconditionError("--session is required when the root holds " +
                                  std::to_string(ids.size()) + " sessions");
        sid = ids.front();
      }
      mushra::Aggregation agg;
      if (mr_agg == "pooled") agg = mushra::Aggregation::kPooled;
      else if (mr_agg == "per_listener") agg = mushra::Aggregation::kPerListener;
      else throw ParameterError("aggregation", "must be pooled or per_listener");
      emit_json(service.report(sid, agg), mr_out,
                snapshot("mushra report", g, {{"root", mr_root}, {"session", sid}, {"aggregation", mr_agg}}));
    } else if (*serve_gen) {
      std::shared_ptr<room::GeneratorEndpoint> gen = room::make_generator(sg_gen);
      room::GeneratorServer server(gen);
      server.listen(sg_host, sg_port);
    } else if (*split) {
      const auto records = labeling::read_manifest(sp_in);
      const auto s = labeling::split_room_disjoint(records, {sp_rooms.begin(), sp_rooms.end()});
      labeling::write_manifest(sp_train, s.train);
      labeling::write_manifest(sp_test, s.test);
      emit_snapshot(sp_train, snapshot("split", g, {{"manifest", sp_in}, {"test_rooms", sp_rooms}}));
      std::cout << json{{"train", s.train.size()}, {"test", s.test.size()}}.dump(2) << "\n";
    }
  } catch (const Error &e) {
    const int code = e.is_validation() ? 1 : 2;
    if (g.json_errors)
      std::cerr << json{{"error", e.what()}, {"kind", e.kind()}, {"exit_code", code}}.dump() << "\n";
    else
      std::cerr << "error: " << e.what() << "\n";
    return code;
  } catch (const json::exception &e) {
    if (g.json_errors)
      std::cerr << json{{"error", e.what()}, {"kind", "parse"}, {"exit_code", 1}}.dump() << "\n";
    else
      std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception &e) {
    if (g.json_errors)
      std::cerr << json{{"error", e.what()}, {"kind", "runtime"}, {"exit_code", 2}}.dump() << "\n";
    else
      std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
