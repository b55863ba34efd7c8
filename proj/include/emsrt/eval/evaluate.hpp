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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "emsrt/eval/metrics.hpp"
#include "emsrt/runtime/stages.hpp"
#include "emsrt/sim/manifest.hpp"
#include "emsrt/sim/replay.hpp"

namespace emsrt::eval {

struct EvalConfig {
  runtime::PipelineConfig pipeline;  // run_dir is set per scenario
  runtime::StageSelection stages;
  sim::ImpairmentProfile impairment;
  sim::ReplayOptions replay{8.0, true};
  audio::NormalizationProfile text_profile = audio::NormalizationProfile::Standard;
  std::vector<std::size_t> ks = {1, 3};
  double f1_threshold = kDefaultF1Threshold;
  bool parallel = false;
};

/// Oracle seed for one scenario: splitmix64(seed ^ fnv1a64(scenario_id)).
std::uint64_t scenario_seed(std::uint64_t seed, const std::string& scenario_id);

/// One scenario through the full pipeline: in-process ingest, paced replay,
/// all stages. The oracle seed is derived from the configured seed and the
/// scenario id.
struct ScenarioRun {
  runtime::RunResult result;
  sim::ReplayReport replay;
  wire::IngestStats ingest;
};

ScenarioRun run_scenario(const sim::ScenarioManifest& manifest, const protocol::KnowledgeBase& kb,
                         const EvalConfig& config, const std::filesystem::path& run_dir);

struct ScenarioResult {
  std::string scenario_id;
  std::string error;  // load, validation or pipeline failure
  std::optional<ErrorCounts> words;
  std::optional<ErrorCounts> chars;
  std::optional<LabelInstance> protocol_instance;  // final ranking vs ground truth
  std::optional<InterventionAccuracy> interventions;
  runtime::RunSummary summary;
  runtime::SloReport slo;
};

struct EvalReport {
  std::vector<ScenarioResult> scenarios;
  std::optional<double> wer;  // pooled over scenarios
  std::optional<double> cer;
  std::optional<double> micro_f1;
  std::optional<double> macro_f1;
  std::map<std::size_t, double> acc_at_k;
  std::optional<double> intervention_accuracy;  // pooled over frames
  bool ok() const;
};

/// Metrics for one finished run against its manifest. Fields without ground
/// truth are left empty.
ScenarioResult score_run(const sim::ScenarioManifest& manifest, const runtime::RunResult& result,
                         const EvalConfig& config);

/// Runs and scores every scenario (sequentially unless config.parallel), then
/// writes report.json, performance.csv, latency.csv and runs/<id>/ under out_dir.
EvalReport run_eval(const std::vector<std::filesystem::path>& scenario_dirs, const protocol::KnowledgeBase& kb,
                    const EvalConfig& config, const std::filesystem::path& out_dir);

/// Metrics only; no timing values, so identical inputs give identical bytes.
nlohmann::json eval_report_to_json(const EvalReport& report, const EvalConfig& config);

void write_eval_outputs(const EvalReport& report, const EvalConfig& config, const std::filesystem::path& out_dir);

inline constexpr const char* kReportFile = "report.json";
inline constexpr const char* kPerformanceFile = "performance.csv";
inline constexpr const char* kLatencyFile = "latency.csv";

}  // namespace emsrt::eval
