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

#include <gtest/gtest.h>

#include <sstream>

#include "emsrt/cli/app.hpp"
#include "emsrt/cli/config.hpp"
#include "emsrt/common/error.hpp"
#include "emsrt/sim/synth.hpp"
#include "emsrt/wire/gateway.hpp"
#include "test_support.hpp"

namespace emsrt::cli {
namespace {

using nlohmann::json;

TEST(Config, DefaultsMatchDocumentedValues) {
  const RunConfig c;
  EXPECT_EQ(c.window_samples, 64000);
  EXPECT_EQ(c.gate_threshold, 0.5);
  EXPECT_EQ(c.slo_target_us, 4'000'000);
  EXPECT_FALSE(c.flush_partial_window);
}

TEST(Config, PrecedenceIsFlagsThenEnvThenFileThenDefaults) {
  testing::TempDir tmp;
  testing::write_file(tmp / "c.json", R"({"window_samples": 48000, "gate_threshold": 0.7, "seed": 3})");
  const auto only_file = parse_config({}, tmp / "c.json", {});
  EXPECT_EQ(only_file.window_samples, 48000);
  EXPECT_EQ(only_file.seed, 3);

  const auto with_env = parse_config({}, tmp / "c.json", {{"gate_threshold", "0.8"}, {"parallel", "true"}});
  EXPECT_EQ(with_env.gate_threshold, 0.8);
  EXPECT_TRUE(with_env.parallel);
  EXPECT_EQ(with_env.window_samples, 48000);

  const auto with_flags = parse_config({{"gate_threshold", "0.9"}}, tmp / "c.json", {{"gate_threshold", "0.8"}});
  EXPECT_EQ(with_flags.gate_threshold, 0.9);
  EXPECT_EQ(with_flags.seed, 3);
}

TEST(Config, UnknownKeyNamesField) {
  testing::TempDir tmp;
  testing::write_file(tmp / "c.json", R"({"window_sampels": 48000})");
  try {
    parse_config({}, tmp / "c.json", {});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "window_sampels");
  }
  EXPECT_THROW(config_from_json({{"bogus", 1}}), ConfigError);
}

TEST(Config, TypeAndRangeErrorsNameField) {
  const std::vector<std::pair<json, std::string>> bad = {
      {{{"window_samples", "lots"}}, "window_samples"},
      {{{"window_samples", 0}}, "window_samples"},
      {{{"gate_threshold", 1.1}}, "gate_threshold"},
      {{{"asr", "whisper"}}, "asr"},
      {{{"asr", "adapter"}}, "asr_endpoint"},
      {{{"oracle_epsilon", -0.1}}, "oracle_epsilon"},
      {{{"oracle_confusion", "mixed"}}, "oracle_confusion"},
      {{{"audio_port", 70000}}, "audio_port"},
      {{{"parallel", "yes"}}, "parallel"},
  };
  for (const auto& [doc, field] : bad) {
    try {
      config_from_json(doc);
      ADD_FAILURE() << doc.dump();
    } catch (const ConfigError& e) {
      EXPECT_EQ(e.field(), field) << doc.dump();
    }
  }
  EXPECT_THROW(parse_config({{"window_samples", "12x"}}, std::nullopt, {}), ConfigError);
  EXPECT_THROW(parse_config({{"parallel", "maybe"}}, std::nullopt, {}), ConfigError);
}

TEST(Config, JsonRoundTrip) {
  RunConfig c;
  c.window_samples = 48000;
  c.asr = "adapter";
  c.asr_endpoint = "exec:engine --fast";
  c.oracle_epsilon = 0.4;
  c.oracle_confusion = "vocabulary";
  c.parallel = true;
  EXPECT_EQ(config_from_json(config_to_json(c)), c);
  EXPECT_EQ(config_from_json(config_to_json(RunConfig{})), RunConfig{});
}

TEST(Config, FlagAndEnvNames) {
  EXPECT_EQ(flag_for("gate_threshold"), "--gate-threshold");
  EXPECT_EQ(flag_for("kb_path"), "--kb");
  EXPECT_EQ(env_for("gate_threshold"), "EMSRT_GATE_THRESHOLD");
  EXPECT_EQ(config_keys().size(), config_to_json(RunConfig{}).size());
}

TEST(Config, LibrarySettingsFollowConfig) {
  RunConfig c;
  c.window_samples = 48000;
  c.asr_delay_ms = 50;
  c.oracle_confusion = "vocabulary";
  const auto p = pipeline_config(c);
  EXPECT_EQ(p.window_samples, 48000u);
  const auto s = stage_selection(c);
  EXPECT_EQ(s.asr_delay, std::chrono::milliseconds(50));
  EXPECT_EQ(s.oracle_confusion, vision::ConfusionModel::VocabularyUniform);
}

int run(const std::vector<std::string>& args, std::string* out = nullptr, std::string* err = nullptr) {
  std::ostringstream o, e;
  CommandLine cli(o, e);
  std::vector<const char*> argv = {"emsrt"};
  for (const auto& a : args) argv.push_back(a.c_str());
  const int code = cli.run(static_cast<int>(argv.size()), argv.data());
  if (out) *out = o.str();
  if (err) *err = e.str();
  return code;
}

TEST(CommandLine, ConfigSubcommandEmitsEffectiveConfig) {
  std::string out;
  ASSERT_EQ(run({"config", "--window-samples", "48000", "--parallel"}, &out), kExitOk);
  const auto j = json::parse(out);
  EXPECT_EQ(j.at("window_samples"), 48000);
  EXPECT_EQ(j.at("parallel"), true);
  EXPECT_EQ(config_from_json(j).window_samples, 48000);
}

TEST(CommandLine, ConfigErrorExitsOneWithJsonLine) {
  std::string err;
  EXPECT_EQ(run({"config", "--gate-threshold", "2"}, nullptr, &err), kExitConfig);
  const auto j = json::parse(err);
  EXPECT_EQ(j.at("error"), "ConfigError");
  EXPECT_EQ(j.at("field"), "gate_threshold");
}

TEST(CommandLine, UsageErrorExitsOne) {
  std::string err;
  EXPECT_EQ(run({"no-such-command"}, nullptr, &err), kExitConfig);
  EXPECT_EQ(json::parse(err).at("error"), "UsageError");
  EXPECT_EQ(run({}, nullptr, &err), kExitConfig);
}

TEST(CommandLine, MetricsFromFiles) {
  testing::TempDir tmp;
  testing::write_file(tmp / "ref.txt", "the patient is stable");
  testing::write_file(tmp / "hyp.txt", "the patient stable");
  std::string out;
  ASSERT_EQ(run({"metrics", "wer", "--ref", (tmp / "ref.txt").string(), "--hyp", (tmp / "hyp.txt").string()}, &out),
            kExitOk);
  EXPECT_DOUBLE_EQ(json::parse(out).at("value").get<double>(), 0.25);

  testing::write_file(tmp / "inst.jsonl",
                      "{\"truth\":[\"a\"],\"predicted\":[[\"a\",0.9],[\"b\",0.6]]}\n"
                      "{\"truth\":[\"b\"],\"predicted\":[{\"label\":\"a\",\"confidence\":0.7}]}\n");
  ASSERT_EQ(run({"metrics", "f1", "--instances", (tmp / "inst.jsonl").string()}, &out), kExitOk);
  EXPECT_DOUBLE_EQ(json::parse(out).at("micro_f1").get<double>(), 0.4);
  ASSERT_EQ(run({"metrics", "acc", "--instances", (tmp / "inst.jsonl").string(), "--k", "1"}, &out), kExitOk);
  EXPECT_DOUBLE_EQ(json::parse(out).at("value").get<double>(), 0.5);
}

TEST(CommandLine, KbValidate) {
  testing::TempDir tmp;
  std::string out;
  EXPECT_EQ(run({"kb-validate", EMSRT_REFERENCE_KB}, &out), kExitOk);
  EXPECT_EQ(json::parse(out).at("protocols"), 43);
  testing::write_file(tmp / "bad.json", R"({"version":1,"nodes":[],"edges":[],"groups":[]})");
  EXPECT_EQ(run({"kb-validate", (tmp / "bad.json").string()}, &out), kExitRuntime);
  EXPECT_EQ(json::parse(out).at("valid"), false);
}

TEST(CommandLine, PredictUsesExtractedAge) {
  testing::TempDir tmp;
  testing::write_file(tmp / "n.txt", "8 year old seizure, convulsions witnessed");
  std::string out;
  ASSERT_EQ(run({"predict", "--text", (tmp / "n.txt").string()}, &out), kExitOk);
  const auto j = json::parse(out);
  EXPECT_EQ(j.at("age"), 8);
  EXPECT_EQ(j.at("ranking").at(0).at("protocol_id"), "medical-seizure (pediatric protocol 9-12)");
}

// Every flag a subcommand accepts must appear in its --help output.
TEST(Executable, HelpListsEveryFlag) {
  std::ostringstream o, e;
  const auto flags = CommandLine(o, e).flags();
  ASSERT_GE(flags.size(), 10u);
  for (const auto& [path, names] : flags) {
    std::vector<std::string> args;
    std::istringstream words(path);
    for (std::string w; words >> w;) args.push_back(w);
    args.push_back("--help");
    const auto r = testing::run_emsrt(args);
    EXPECT_EQ(r.exit_code, 0) << path;
    for (const auto& flag : names) EXPECT_NE(r.out.find(flag), std::string::npos) << path << " help lacks " << flag;
  }
}

TEST(Executable, EnvironmentLayer) {
  const auto r = testing::run_emsrt({"config"}, "EMSRT_WINDOW_SAMPLES=48000 EMSRT_SEED=11");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j.at("window_samples"), 48000);
  EXPECT_EQ(j.at("seed"), 11);
  const auto flag_wins = testing::run_emsrt({"config", "--seed", "12"}, "EMSRT_SEED=11");
  EXPECT_EQ(json::parse(flag_wins.out).at("seed"), 12);
}

TEST(Executable, RunOnOccupiedPortExitsTwo) {
  testing::TempDir tmp;
  sim::SynthSpec spec;
  spec.scenario_id = "busy";
  spec.duration_s = 4;
  sim::write_synthetic_scenario(tmp / "busy", spec);
  wire::GatewayConfig cfg;
  wire::Gateway holder(cfg);
  const auto r = testing::run_emsrt({"run", "--scenario", (tmp / "busy").string(), "--audio-port",
                                     std::to_string(holder.audio_port()), "--video-port", "0", "--feedback-port", "0",
                                     "--run-dir", (tmp / "run").string()});
  EXPECT_EQ(r.exit_code, kExitRuntime);
  EXPECT_EQ(json::parse(r.err).at("error"), "StartupError");
}

TEST(Executable, RunWithSelfReplayProducesFeedback) {
  testing::TempDir tmp;
  sim::SynthSpec spec;
  spec.scenario_id = "self";
  spec.duration_s = 16;
  sim::write_synthetic_scenario(tmp / "self", spec);
  const auto r = testing::run_emsrt({"run", "--scenario", (tmp / "self").string(), "--audio-port", "0",
                                     "--video-port", "0", "--feedback-port", "0", "--self-replay", "--replay-speed",
                                     "8", "--idle-timeout-ms", "800", "--run-dir", (tmp / "run").string()});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string first, last;
  std::getline(lines, first);
  for (std::string l; std::getline(lines, l);) last = l;
  EXPECT_EQ(json::parse(first).at("event"), "listening");
  EXPECT_EQ(json::parse(last).at("summary").at("protocol_feedbacks"), 4);
  EXPECT_TRUE(std::filesystem::exists(tmp / "run" / "run_info.json"));
}

}  // namespace
}  // namespace emsrt::cli
