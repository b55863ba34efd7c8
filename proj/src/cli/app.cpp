// Copyright 2026 The emsrt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "emsrt/cli/app.hpp"

#include <algorithm>
#include <atomic>
#include <csignal>
#include <fstream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "emsrt/cli/config.hpp"
#include "emsrt/common/error.hpp"
#include "emsrt/eval/evaluate.hpp"
#include "emsrt/eval/metrics.hpp"
#include "emsrt/protocol/incident.hpp"
#include "emsrt/protocol/knowledge_base.hpp"
#include "emsrt/protocol/ranking.hpp"
#include "emsrt/runtime/pipeline.hpp"
#include "emsrt/sim/manifest.hpp"
#include "emsrt/sim/replay.hpp"
#include "emsrt/sim/synth.hpp"
#include "emsrt/wire/gateway.hpp"

namespace emsrt::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

std::string read_text(const fs::path& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), "cannot read file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw SchemaError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

/// Directories holding scenario.json; a directory without one contributes its
/// immediate subdirectories that do, in name order.
std::vector<fs::path> expand_scenarios(const std::vector<std::string>& dirs) {
  std::vector<fs::path> out;
  for (const auto& d : dirs) {
    if (fs::exists(fs::path(d) / "scenario.json")) {
      out.emplace_back(d);
      continue;
    }
    if (!fs::is_directory(d)) throw ConfigError("scenarios", "'" + d + "' is not a directory");
    std::vector<fs::path> found;
    for (const auto& e : fs::directory_iterator(d))
      if (e.is_directory() && fs::exists(e.path() / "scenario.json")) found.push_back(e.path());
    if (found.empty()) throw ConfigError("scenarios", "no scenario.json under '" + d + "'");
    std::sort(found.begin(), found.end());
    out.insert(out.end(), found.begin(), found.end());
  }
  return out;
}

sim::ScenarioManifest load_valid_manifest(const fs::path& dir) {
  auto manifest = sim::load_manifest(dir);
  auto violations = sim::validate_manifest(manifest);
  if (!violations.empty()) {
    std::string msg = "invalid scenario '" + dir.string() + "':";
    for (const auto& v : violations) msg += " " + v.field + ": " + v.rule + ";";
    throw ManifestError(msg);
  }
  return manifest;
}

protocol::KnowledgeBase load_kb(const RunConfig& config) {
  return protocol::load_knowledge_base(config.kb_path.empty() ? default_kb_path() : config.kb_path);
}

}  // namespace

struct CommandLine::State {
  std::ostream& out;
  std::ostream& err;
  CLI::App app{"Real-time EMS decision support: ingest, stage pipeline, replay and evaluation.", "emsrt"};

  // Shared flag storage. Config flags are kept as text and layered in parse_config().
  std::map<CLI::App*, std::map<std::string, std::string>> config_text;
  std::map<CLI::App*, std::map<std::string, CLI::Option*>> config_opts;
  std::string config_file;
  std::function<int()> action;  // set by the selected subcommand's callback

  std::vector<std::string> scenarios;
  std::string scenario;
  std::string target = "127.0.0.1";
  std::int64_t audio_port = RunConfig{}.audio_port;
  std::int64_t video_port = RunConfig{}.video_port;
  sim::ImpairmentProfile impairment;
  double speed = 1.0;
  bool unpaced = false;
  bool self_replay = false;
  std::string out_dir;
  std::string file;
  std::string ref_path, hyp_path, instances_path;
  std::string profile = "standard";
  double threshold = eval::kDefaultF1Threshold;
  std::size_t k = 1;
  std::string rule = "any";
  std::string kb_path;
  std::string text_path;
  std::optional<int> age;
  std::uint64_t synth_seed = 7;
  int duration_s = 60;

  State(std::ostream& o, std::ostream& e) : out(o), err(e) { build(); }

  void add_config_flags(CLI::App* sub) {
    sub->add_option("--config", config_file, "JSON config file (flags > EMSRT_* environment > file > defaults)");
    for (const auto& k : config_keys()) {
      auto& slot = config_text[sub][k.key];
      CLI::Option* opt = k.type == KeyType::Boolean ? sub->add_flag(flag_for(k.key) + "{true}", slot, k.help)
                                                     : sub->add_option(flag_for(k.key), slot, k.help);
      config_opts[sub][k.key] = opt;
    }
  }

  RunConfig effective(CLI::App* sub) const {
    std::map<std::string, std::string> flags;
    for (const auto& [key, opt] : config_opts.at(sub))
      if (opt->count() > 0) flags[key] = config_text.at(sub).at(key);
    std::optional<fs::path> file;
    if (!config_file.empty()) file = config_file;
    return parse_config(flags, file, environment_overrides());
  }

  void add_impairment_flags(CLI::App* sub) {
    sub->add_option("--loss", impairment.loss_prob, "packet loss probability in [0,1]");
    sub->add_option("--reorder", impairment.reorder_prob, "probability a packet is held back and swapped with the next");
    sub->add_option("--jitter-ms", impairment.jitter_ms, "upper bound of uniform extra send delay");
    sub->add_option("--impairment-seed", impairment.seed, "seed for the impairment injector");
  }

  void build();
  int simulate();
  int run_gateway(CLI::App* sub);
  int evaluate(CLI::App* sub);
  int kb_validate();
  int scenario_validate();
  int metric(const std::string& name);
  int predict();
  int synth();
};

void CommandLine::State::build() {
  app.require_subcommand(1);
  app.set_version_flag("--version", "emsrt 0.1.0");

  auto* sim_cmd = app.add_subcommand("simulate", "Replay scenarios over UDP to a running gateway");
  sim_cmd->add_option("--scenario", scenarios, "scenario directory (repeatable; a parent directory expands)")->required();
  sim_cmd->add_option("--target", target, "gateway host");
  sim_cmd->add_option("--audio-port", audio_port, "gateway audio port");
  sim_cmd->add_option("--video-port", video_port, "gateway video port");
  add_impairment_flags(sim_cmd);
  sim_cmd->add_option("--speed", speed, "replay speed multiplier (1 = real time)");
  sim_cmd->add_flag("--unpaced", unpaced, "send as fast as possible");
  sim_cmd->callback([this] { action = [this] { return simulate(); }; });

  auto* run_cmd = app.add_subcommand("run", "Start the gateway and pipeline; stop after audio goes idle");
  add_config_flags(run_cmd);
  run_cmd->add_option("--scenario", scenario, "scenario directory supplying replay transcripts and oracle labels");
  run_cmd->add_flag("--self-replay", self_replay, "replay --scenario into this gateway over UDP at replay_speed");
  run_cmd->callback([this, run_cmd] { action = [this, run_cmd] { return run_gateway(run_cmd); }; });

  auto* eval_cmd = app.add_subcommand("eval", "Run scenarios in-process and score them");
  add_config_flags(eval_cmd);
  eval_cmd->add_option("--scenarios", scenarios, "scenario directories (a parent directory expands)")->required();
  eval_cmd->add_option("--out", out_dir, "output directory")->required();
  add_impairment_flags(eval_cmd);
  eval_cmd->callback([this, eval_cmd] { action = [this, eval_cmd] { return evaluate(eval_cmd); }; });

  auto* cfg_cmd = app.add_subcommand("config", "Print the effective configuration as JSON");
  add_config_flags(cfg_cmd);
  cfg_cmd->callback([this, cfg_cmd] {
    action = [this, cfg_cmd] {
      out << config_to_json(effective(cfg_cmd)).dump(2) << "\n";
      return kExitOk;
    };
  });

  auto* kb_cmd = app.add_subcommand("kb-validate", "Check a knowledge base file against the schema rules");
  kb_cmd->add_option("file", file, "knowledge base JSON")->required();
  kb_cmd->callback([this] { action = [this] { return kb_validate(); }; });

  auto* sv_cmd = app.add_subcommand("scenario-validate", "Check a scenario manifest");
  sv_cmd->add_option("dir", file, "scenario directory")->required();
  sv_cmd->callback([this] { action = [this] { return scenario_validate(); }; });

  auto* metrics_cmd = app.add_subcommand("metrics", "Compute one metric from files");
  metrics_cmd->require_subcommand(1);
  for (const char* name : {"wer", "cer"}) {
    auto* m = metrics_cmd->add_subcommand(name, std::string(name == std::string("wer") ? "Word" : "Character") +
                                                    " error rate of a hypothesis text against a reference text");
    m->add_option("--ref", ref_path, "reference text file")->required();
    m->add_option("--hyp", hyp_path, "hypothesis text file")->required();
    m->add_option("--profile", profile, "normalization: standard | limited-vocab");
    m->callback([this, name] { action = [this, name] { return metric(name); }; });
  }
  auto* f1 = metrics_cmd->add_subcommand("f1", "Micro and macro F1 over JSONL instances {truth, predicted}");
  f1->add_option("--instances", instances_path, "JSONL file")->required();
  f1->add_option("--threshold", threshold, "confidence threshold for a predicted label");
  f1->callback([this] { action = [this] { return metric("f1"); }; });
  auto* acc = metrics_cmd->add_subcommand("acc", "Top-K accuracy over JSONL instances {truth, predicted}");
  acc->add_option("--instances", instances_path, "JSONL file")->required();
  acc->add_option("--k", k, "rank cutoff")->check(CLI::PositiveNumber);
  acc->add_option("--rule", rule, "hit when any | all true labels are in the top K");
  acc->callback([this] { action = [this] { return metric("acc"); }; });

  auto* predict_cmd = app.add_subcommand("predict", "Rank protocols for a narrative with the built-in scorer");
  predict_cmd->add_option("--kb", kb_path, "knowledge base file (default: shipped reference KB)");
  predict_cmd->add_option("--text", text_path, "narrative text file, or - for stdin")->required();
  predict_cmd->add_option("--age", age, "patient age; extracted from the text when absent");
  predict_cmd->callback([this] { action = [this] { return predict(); }; });

  auto* synth_cmd = app.add_subcommand("synth-scenarios", "Write the synthetic reference scenario set");
  synth_cmd->add_option("--out", out_dir, "output directory")->required();
  synth_cmd->add_option("--seed", synth_seed, "generator seed");
  synth_cmd->add_option("--duration-s", duration_s, "scenario length in seconds (rounded up to 4)")
      ->check(CLI::PositiveNumber);
  synth_cmd->callback([this] { action = [this] { return synth(); }; });
}

int CommandLine::State::simulate() {
  sim::validate_impairment(impairment);
  if (!(speed > 0)) throw ConfigError("speed", "must be positive");
  if (audio_port <= 0 || audio_port > 65535) throw ConfigError("audio_port", "must be within [1, 65535]");
  if (video_port <= 0 || video_port > 65535) throw ConfigError("video_port", "must be within [1, 65535]");
  std::vector<sim::ScenarioManifest> manifests;
  for (const auto& dir : expand_scenarios(scenarios)) manifests.push_back(load_valid_manifest(dir));
  sim::UdpSink sink(target, static_cast<std::uint16_t>(audio_port), static_cast<std::uint16_t>(video_port));
  for (const auto& report : sim::replay_batch(manifests, sink, impairment, {speed, !unpaced}))
    out << sim::report_to_json(report).dump() << "\n" << std::flush;
  return kExitOk;
}

int CommandLine::State::run_gateway(CLI::App* sub) {
  const RunConfig config = effective(sub);
  const auto kb = load_kb(config);
  auto selection = stage_selection(config);
  runtime::ScenarioTruth truth;
  std::optional<sim::ScenarioManifest> manifest;
  if (!scenario.empty()) {
    manifest = load_valid_manifest(scenario);
    truth = {manifest->transcript_alignment, vision::InterventionTimeline(manifest->ground_truth_interventions)};
    selection.oracle_seed = eval::scenario_seed(selection.oracle_seed, manifest->scenario_id);
  } else if (config.asr == "replay" || config.vision == "oracle") {
    throw ConfigError("scenario", "required when asr is replay or vision is oracle");
  }
  if (self_replay && !manifest) throw ConfigError("self_replay", "requires --scenario");

  wire::GatewayConfig gw_config;
  gw_config.bind_host = config.bind_host;
  gw_config.audio_port = static_cast<std::uint16_t>(config.audio_port);
  gw_config.video_port = static_cast<std::uint16_t>(config.video_port);
  gw_config.feedback_port = static_cast<std::uint16_t>(config.feedback_port);
  wire::Gateway gateway(gw_config);
  out << json{{"event", "listening"},
              {"audio_port", gateway.audio_port()},
              {"video_port", gateway.video_port()},
              {"feedback_port", gateway.feedback_port()}}
             .dump()
      << "\n"
      << std::flush;

  runtime::Pipeline pipeline(pipeline_config(config), kb, runtime::make_stages(selection, kb, truth),
                             gateway.ingestor().audio_queue(), gateway.ingestor().frame_queue(),
                             [&gateway](const std::vector<std::uint8_t>& frame, const wire::FeedbackMessage&) {
                               gateway.publish_feedback(frame);
                             });
  json info = {{"config", config_to_json(config)}};
  if (manifest) info["scenario_id"] = manifest->scenario_id;
  pipeline.set_run_info(info);
  pipeline.start();

  std::thread replayer;
  std::atomic<bool> replay_failed{false};
  if (self_replay) {
    replayer = std::thread([&] {
      try {
        sim::UdpSink sink(config.bind_host == "0.0.0.0" ? "127.0.0.1" : config.bind_host, gateway.audio_port(),
                          gateway.video_port());
        sim::replay_scenario(*manifest, sink, {}, {config.replay_speed, true});
      } catch (const std::exception&) {
        replay_failed = true;
      }
    });
  }

  g_interrupted = false;
  auto prev_int = std::signal(SIGINT, on_signal);
  auto prev_term = std::signal(SIGTERM, on_signal);
  const auto started = Clock::now();
  const auto idle = std::chrono::milliseconds(config.idle_timeout_ms);
  while (!g_interrupted && !replay_failed) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    const auto now = Clock::now();
    if (config.max_duration_s > 0 &&
        now - started >= std::chrono::duration<double>(config.max_duration_s))
      break;
    if (auto last = gateway.ingestor().last_audio_arrival(); last && now - *last >= idle) break;
  }
  std::signal(SIGINT, prev_int);
  std::signal(SIGTERM, prev_term);

  if (replayer.joinable()) replayer.join();
  gateway.stop_ingest();
  auto result = pipeline.wait();
  gateway.stop();
  json summary = runtime::summary_to_json(result.summary);
  out << json{{"event", "finished"},
              {"summary", summary},
              {"slo_violations", result.slo.violations},
              {"ok", result.ok()}}
             .dump()
      << "\n";
  if (replay_failed) throw PipelineError("self replay failed");
  if (!result.ok()) throw PipelineError(result.error);
  return kExitOk;
}

int CommandLine::State::evaluate(CLI::App* sub) {
  const RunConfig config = effective(sub);
  sim::validate_impairment(impairment);
  const auto kb = load_kb(config);
  auto eval_cfg = eval_config(config);
  eval_cfg.impairment = impairment;
  const auto report = eval::run_eval(expand_scenarios(scenarios), kb, eval_cfg, out_dir);
  out << eval::eval_report_to_json(report, eval_cfg).dump(2) << "\n";
  if (!report.ok()) {
    for (const auto& s : report.scenarios)
      if (!s.error.empty()) throw PipelineError(s.scenario_id + ": " + s.error);
  }
  return kExitOk;
}

int CommandLine::State::kb_validate() {
  const json doc = read_json(file);
  const auto violations = protocol::validate_knowledge_base(doc);
  if (!violations.empty()) {
    out << json{{"valid", false}, {"violations", violations}}.dump(2) << "\n";
    return kExitRuntime;
  }
  const auto kb = protocol::KnowledgeBase::from_json(doc);
  std::size_t vision = 0;
  for (const auto& id : kb.protocol_ids())
    if (kb.find(id)->vision_enabled) ++vision;
  out << json{{"valid", true},
              {"protocols", kb.protocol_ids().size()},
              {"groups", kb.groups().size()},
              {"vision_enabled", vision},
              {"interventions", kb.intervention_vocabulary().size()}}
             .dump(2)
      << "\n";
  return kExitOk;
}

int CommandLine::State::scenario_validate() {
  const auto manifest = sim::load_manifest(file);
  const auto violations = sim::validate_manifest(manifest);
  json list = json::array();
  for (const auto& v : violations) list.push_back({{"field", v.field}, {"rule", v.rule}});
  out << json{{"scenario_id", manifest.scenario_id}, {"valid", violations.empty()}, {"violations", list}}.dump(2)
      << "\n";
  return violations.empty() ? kExitOk : kExitRuntime;
}

namespace {

std::vector<eval::LabelInstance> read_instances(const std::string& path) {
  std::vector<eval::LabelInstance> out;
  std::istringstream lines(read_text(path));
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      eval::LabelInstance inst;
      for (const auto& t : j.at("truth")) inst.truth.insert(t.get<std::string>());
      for (const auto& p : j.at("predicted")) {
        if (p.is_array()) inst.predicted.emplace_back(p.at(0).get<std::string>(), p.at(1).get<double>());
        else inst.predicted.emplace_back(p.at("label").get<std::string>(), p.at("confidence").get<double>());
      }
      out.push_back(std::move(inst));
    } catch (const json::exception& e) {
      throw ConfigError("instances", path + " line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

int CommandLine::State::metric(const std::string& name) {
  if (name == "wer" || name == "cer") {
    const auto prof = audio::parse_profile(profile);
    if (!prof) throw ConfigError("profile", "must be standard or limited-vocab");
    const auto ref = read_text(ref_path), hyp = read_text(hyp_path);
    const auto counts = name == "wer" ? eval::word_errors(ref, hyp, *prof) : eval::char_errors(ref, hyp, *prof);
    out << json{{"metric", name},
                {"value", counts.rate()},
                {"edits", counts.edits},
                {"reference_length", counts.reference_length},
                {"hypothesis_length", counts.hypothesis_length}}
               .dump()
        << "\n";
    return kExitOk;
  }
  const auto instances = read_instances(instances_path);
  if (name == "f1") {
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("threshold", "must be within [0, 1]");
    out << json{{"metric", "f1"},
                {"instances", instances.size()},
                {"micro_f1", eval::micro_f1(instances, threshold)},
                {"macro_f1", eval::macro_f1(instances, threshold)}}
               .dump()
        << "\n";
    return kExitOk;
  }
  if (rule != "any" && rule != "all") throw ConfigError("rule", "must be any or all");
  const auto hit = rule == "any" ? eval::HitRule::AnyLabel : eval::HitRule::AllLabels;
  out << json{{"metric", "acc"}, {"k", k}, {"rule", rule}, {"instances", instances.size()},
              {"value", eval::acc_at_k(instances, k, hit)}}
             .dump()
      << "\n";
  return kExitOk;
}

int CommandLine::State::predict() {
  const auto kb = protocol::load_knowledge_base(kb_path.empty() ? default_kb_path() : kb_path);
  audio::TranscriptSegment segment;
  segment.text = read_text(text_path);
  auto state = protocol::accumulate({}, segment);
  if (age) state.extracted_age = *age;
  const protocol::LexicalScorer scorer(kb);
  const auto ranking = protocol::refine(scorer.predict(state.accumulated_text, 0), state, kb);
  json entries = json::array();
  for (const auto& e : ranking.entries)
    entries.push_back({{"protocol_id", e.protocol_id}, {"confidence", e.confidence}, {"raw_score", e.raw_score}});
  out << json{{"age", state.extracted_age ? json(*state.extracted_age) : json(nullptr)},
              {"low_information", ranking.low_information},
              {"ranking", entries}}
             .dump(2)
      << "\n";
  return kExitOk;
}

int CommandLine::State::synth() {
  const auto dirs = sim::write_reference_scenarios(out_dir, synth_seed, duration_s);
  json list = json::array();
  for (const auto& d : dirs) list.push_back(d.string());
  out << json{{"scenarios", list}}.dump(2) << "\n";
  return kExitOk;
}

CommandLine::CommandLine(std::ostream& out, std::ostream& err) : state_(std::make_unique<State>(out, err)) {}

CommandLine::~CommandLine() = default;

int CommandLine::run(int argc, const char* const* argv) {
  auto& s = *state_;
  auto report = [&](const std::string& kind, const std::string& message, const std::string* field) {
    json line = {{"error", kind}, {"message", message}};
    if (field) line["field"] = *field;
    s.err << line.dump() << "\n" << std::flush;
  };
  try {
    s.app.parse(argc, argv);
    return s.action ? s.action() : kExitOk;
  } catch (const CLI::CallForHelp& e) {
    return s.app.exit(e, s.out, s.err);
  } catch (const CLI::CallForAllHelp& e) {
    return s.app.exit(e, s.out, s.err);
  } catch (const CLI::CallForVersion& e) {
    return s.app.exit(e, s.out, s.err);
  } catch (const CLI::ParseError& e) {
    report("UsageError", e.what(), nullptr);
    return kExitConfig;
  } catch (const ConfigError& e) {
    report(e.kind(), e.what(), &e.field());
    return kExitConfig;
  } catch (const Error& e) {
    report(e.kind(), e.what(), nullptr);
    return kExitRuntime;
  } catch (const std::exception& e) {
    report("InternalError", e.what(), nullptr);
    return kExitRuntime;
  }
}

std::map<std::string, std::vector<std::string>> CommandLine::flags() const {
  std::map<std::string, std::vector<std::string>> out;
  std::function<void(const CLI::App*, const std::string&)> walk = [&](const CLI::App* app, const std::string& path) {
    for (const CLI::App* sub : app->get_subcommands({})) {
      const std::string p = path.empty() ? sub->get_name() : path + " " + sub->get_name();
      auto& list = out[p];
      for (const CLI::Option* opt : sub->get_options()) {
        for (const auto& name : opt->get_lnames()) list.push_back("--" + name);
        if (opt->get_lnames().empty() && opt->get_positional()) list.push_back(opt->get_name());
      }
      walk(sub, p);
    }
  };
  walk(&state_->app, "");
  return out;
}

}  // namespace emsrt::cli
