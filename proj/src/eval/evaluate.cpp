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

#include "emsrt/eval/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>

#include "emsrt/common/csv.hpp"
#include "emsrt/common/error.hpp"
#include "emsrt/common/rng.hpp"

namespace emsrt::eval {
namespace {

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

std::string cell(const std::optional<double>& v) { return v ? runtime::format_real(*v) : "NA"; }

std::string ms(std::int64_t us) { return runtime::format_real(static_cast<double>(us) / 1000.0); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  out << text;
  if (!out) throw PipelineError("cannot write '" + path.string() + "'");
}

}  // namespace

std::uint64_t scenario_seed(std::uint64_t seed, const std::string& scenario_id) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : scenario_id) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return splitmix64(seed ^ h);
}

bool EvalReport::ok() const {
  return std::all_of(scenarios.begin(), scenarios.end(), [](const auto& s) { return s.error.empty(); });
}

ScenarioRun run_scenario(const sim::ScenarioManifest& manifest, const protocol::KnowledgeBase& kb,
                         const EvalConfig& config, const std::filesystem::path& run_dir) {
  auto selection = config.stages;
  selection.oracle_seed = scenario_seed(config.stages.oracle_seed, manifest.scenario_id);
  runtime::ScenarioTruth truth{manifest.transcript_alignment,
                               vision::InterventionTimeline(manifest.ground_truth_interventions)};
  auto pipeline_config = config.pipeline;
  pipeline_config.run_dir = run_dir;

  wire::Ingestor ingestor;
  sim::DirectSink sink(ingestor);
  runtime::Pipeline pipeline(pipeline_config, kb, runtime::make_stages(selection, kb, truth), ingestor.audio_queue(),
                             ingestor.frame_queue(), nullptr);
  pipeline.set_run_info({{"scenario_id", manifest.scenario_id}});
  pipeline.start();
  ScenarioRun run;
  try {
    run.replay = sim::replay_scenario(manifest, sink, config.impairment, config.replay);
  } catch (...) {
    sink.finish();
    pipeline.wait();
    throw;
  }
  sink.finish();
  run.result = pipeline.wait();
  run.ingest = ingestor.stats();
  return run;
}

ScenarioResult score_run(const sim::ScenarioManifest& manifest, const runtime::RunResult& result,
                         const EvalConfig& config) {
  ScenarioResult out;
  out.scenario_id = manifest.scenario_id;
  out.error = result.error;
  out.summary = result.summary;
  out.slo = result.slo;

  const double processed_end_s = static_cast<double>(result.summary.windows) *
                                 static_cast<double>(config.pipeline.window_samples) / wire::kSampleRateHz;

  if (!manifest.transcript_alignment.empty()) {
    std::string reference, hypothesis;
    for (const auto& seg : manifest.transcript_alignment) {
      if (seg.start_s >= processed_end_s || seg.text.empty()) continue;
      if (!reference.empty()) reference += ' ';
      reference += seg.text;
    }
    auto transcripts = result.transcripts;
    std::sort(transcripts.begin(), transcripts.end(),
              [](const auto& a, const auto& b) { return a.window_id < b.window_id; });
    for (const auto& t : transcripts) {
      if (t.text.empty()) continue;
      if (!hypothesis.empty()) hypothesis += ' ';
      hypothesis += t.text;
    }
    out.words = word_errors(reference, hypothesis, config.text_profile);
    out.chars = char_errors(reference, hypothesis, config.text_profile);
  }

  if (!manifest.ground_truth_protocols.empty()) {
    LabelInstance inst;
    inst.truth.insert(manifest.ground_truth_protocols.begin(), manifest.ground_truth_protocols.end());
    const protocol::RankedPrediction* last = nullptr;
    for (const auto& p : result.predictions)
      if (!last || p.window_id > last->window_id) last = &p;
    if (last)
      for (const auto& e : last->entries) inst.predicted.emplace_back(e.protocol_id, e.confidence);
    out.protocol_instance = std::move(inst);
  }

  if (!manifest.ground_truth_interventions.empty()) {
    const vision::InterventionTimeline timeline(manifest.ground_truth_interventions);
    std::vector<FrameTruth> truth;
    for (const auto& f : manifest.frames) {
      if (f.timestamp_s >= processed_end_s) continue;
      if (auto label = timeline.label_at(static_cast<std::uint64_t>(std::llround(f.timestamp_s * 1e6))))
        truth.push_back({f.frame_id, *label});
    }
    std::map<std::uint32_t, std::string> predicted;
    for (const auto& p : result.interventions) predicted[p.frame_id] = p.label;
    if (!truth.empty()) out.interventions = intervention_accuracy(predicted, truth);
  }
  return out;
}

EvalReport run_eval(const std::vector<std::filesystem::path>& scenario_dirs, const protocol::KnowledgeBase& kb,
                    const EvalConfig& config, const std::filesystem::path& out_dir) {
  auto one = [&](const std::filesystem::path& dir) {
    ScenarioResult failed;
    failed.scenario_id = dir.filename().string();
    try {
      auto manifest = sim::load_manifest(dir);
      failed.scenario_id = manifest.scenario_id;
      if (auto v = sim::validate_manifest(manifest); !v.empty()) {
        failed.error = "invalid manifest: " + v.front().field + ": " + v.front().rule;
        return failed;
      }
      auto run = run_scenario(manifest, kb, config, out_dir.empty() ? out_dir : out_dir / "runs" / manifest.scenario_id);
      return score_run(manifest, run.result, config);
    } catch (const std::exception& e) {
      failed.error = e.what();
      return failed;
    }
  };

  EvalReport report;
  if (config.parallel) {
    std::vector<std::future<ScenarioResult>> futures;
    for (const auto& dir : scenario_dirs) futures.push_back(std::async(std::launch::async, one, dir));
    for (auto& f : futures) report.scenarios.push_back(f.get());
  } else {
    for (const auto& dir : scenario_dirs) report.scenarios.push_back(one(dir));
  }

  ErrorCounts words, chars;
  bool have_text = false;
  std::vector<LabelInstance> instances;
  std::size_t frames = 0, correct = 0;
  for (const auto& s : report.scenarios) {
    if (s.words) {
      have_text = true;
      words.edits += s.words->edits;
      words.reference_length += s.words->reference_length;
      words.hypothesis_length += s.words->hypothesis_length;
      chars.edits += s.chars->edits;
      chars.reference_length += s.chars->reference_length;
      chars.hypothesis_length += s.chars->hypothesis_length;
    }
    if (s.protocol_instance) instances.push_back(*s.protocol_instance);
    if (s.interventions) {
      frames += s.interventions->frames;
      correct += s.interventions->correct;
    }
  }
  if (have_text) {
    report.wer = words.rate();
    report.cer = chars.rate();
  }
  if (!instances.empty()) {
    report.micro_f1 = micro_f1(instances, config.f1_threshold);
    report.macro_f1 = macro_f1(instances, config.f1_threshold);
    for (auto k : config.ks) report.acc_at_k[k] = acc_at_k(instances, k);
  }
  if (frames) report.intervention_accuracy = static_cast<double>(correct) / static_cast<double>(frames);

  if (!out_dir.empty()) write_eval_outputs(report, config, out_dir);
  return report;
}

nlohmann::json eval_report_to_json(const EvalReport& report, const EvalConfig& config) {
  nlohmann::json scenarios = nlohmann::json::array();
  for (const auto& s : report.scenarios) {
    nlohmann::json j = {{"scenario_id", s.scenario_id},
                        {"error", s.error.empty() ? nlohmann::json(nullptr) : nlohmann::json(s.error)},
                        {"windows", s.summary.windows},
                        {"protocol_feedbacks", s.summary.protocol_feedbacks},
                        {"classifier_calls", s.summary.classifier_calls}};
    j["wer"] = s.words ? nlohmann::json(s.words->rate()) : nlohmann::json(nullptr);
    j["cer"] = s.chars ? nlohmann::json(s.chars->rate()) : nlohmann::json(nullptr);
    if (s.protocol_instance) {
      const auto top = top_k(*s.protocol_instance, 3);
      j["top3"] = top;
      j["micro_f1"] = micro_f1({*s.protocol_instance}, config.f1_threshold);
      nlohmann::json acc = nlohmann::json::object();
      for (auto k : config.ks) acc[std::to_string(k)] = acc_at_k({*s.protocol_instance}, k);
      j["acc_at_k"] = acc;
    } else {
      j["top3"] = nullptr;
      j["micro_f1"] = nullptr;
      j["acc_at_k"] = nullptr;
    }
    if (s.interventions) {
      nlohmann::json per = nlohmann::json::object();
      for (const auto& [label, cn] : s.interventions->per_label)
        per[label] = {{"correct", cn.first}, {"frames", cn.second}};
      j["intervention_accuracy"] = s.interventions->overall;
      j["intervention_frames"] = s.interventions->frames;
      j["intervention_per_label"] = per;
    } else {
      j["intervention_accuracy"] = nullptr;
    }
    scenarios.push_back(std::move(j));
  }
  nlohmann::json acc = nlohmann::json::object();
  for (const auto& [k, v] : report.acc_at_k) acc[std::to_string(k)] = v;
  return {{"scenarios", scenarios},
          {"wer", opt(report.wer)},
          {"cer", opt(report.cer)},
          {"micro_f1", opt(report.micro_f1)},
          {"macro_f1", opt(report.macro_f1)},
          {"acc_at_k", acc},
          {"intervention_accuracy", opt(report.intervention_accuracy)},
          {"f1_threshold", config.f1_threshold},
          {"text_profile", audio::to_string(config.text_profile)}};
}

void write_eval_outputs(const EvalReport& report, const EvalConfig& config, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_text(out_dir / kReportFile, eval_report_to_json(report, config).dump(2) + "\n");

  std::vector<std::string> header{"scenario_id", "wer", "cer", "micro_f1", "macro_f1"};
  for (auto k : config.ks) header.push_back("acc_at_" + std::to_string(k));
  header.push_back("intervention_accuracy");
  std::string perf = csv::row(header) + "\n";
  for (const auto& s : report.scenarios) {
    std::vector<std::string> row{s.scenario_id};
    row.push_back(s.words ? runtime::format_real(s.words->rate()) : "NA");
    row.push_back(s.chars ? runtime::format_real(s.chars->rate()) : "NA");
    if (s.protocol_instance) {
      row.push_back(runtime::format_real(micro_f1({*s.protocol_instance}, config.f1_threshold)));
      row.push_back(runtime::format_real(macro_f1({*s.protocol_instance}, config.f1_threshold)));
      for (auto k : config.ks) row.push_back(runtime::format_real(acc_at_k({*s.protocol_instance}, k)));
    } else {
      row.insert(row.end(), 2 + config.ks.size(), "NA");
    }
    row.push_back(s.interventions ? runtime::format_real(s.interventions->overall) : "NA");
    perf += csv::row(row) + "\n";
  }
  std::vector<std::string> all{"all", cell(report.wer), cell(report.cer), cell(report.micro_f1), cell(report.macro_f1)};
  for (auto k : config.ks) {
    auto it = report.acc_at_k.find(k);
    all.push_back(it == report.acc_at_k.end() ? "NA" : runtime::format_real(it->second));
  }
  all.push_back(cell(report.intervention_accuracy));
  perf += csv::row(all) + "\n";
  write_text(out_dir / kPerformanceFile, perf);

  std::string lat =
      "scenario_id,windows,asr_p50_ms,asr_p95_ms,protocol_p50_ms,protocol_p95_ms,protocol_feedback_p50_ms,"
      "protocol_feedback_p95_ms,protocol_feedback_max_ms,vision_p50_ms,vision_p95_ms,"
      "intervention_feedback_p50_ms,intervention_feedback_p95_ms,slo_violations\n";
  for (const auto& s : report.scenarios) {
    auto stage = [&](const char* name) {
      auto it = s.slo.stages.find(name);
      return it == s.slo.stages.end() ? runtime::Percentiles{} : it->second;
    };
    const auto asr = stage("asr"), proto = stage("protocol"), fb = stage("protocol_feedback"),
               vis = stage("vision"), ifb = stage("intervention_feedback");
    lat += csv::row({s.scenario_id, std::to_string(s.summary.windows), ms(asr.p50), ms(asr.p95), ms(proto.p50),
                     ms(proto.p95), ms(fb.p50), ms(fb.p95), ms(fb.max), ms(vis.p50), ms(vis.p95), ms(ifb.p50),
                     ms(ifb.p95), std::to_string(s.slo.violations.size())}) +
           "\n";
  }
  write_text(out_dir / kLatencyFile, lat);
}

}  // namespace emsrt::eval
