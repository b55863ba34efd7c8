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

#include <cmath>
#include <deque>
#include <numeric>
#include <thread>

#include "emsrt/common/error.hpp"
#include "emsrt/runtime/artifacts.hpp"
#include "emsrt/runtime/feedback_queue.hpp"
#include "emsrt/runtime/pipeline.hpp"
#include "emsrt/runtime/slo.hpp"
#include "emsrt/runtime/stages.hpp"
#include "emsrt/sim/replay.hpp"
#include "emsrt/sim/synth.hpp"
#include "emsrt/sim/wav.hpp"
#include "test_support.hpp"

namespace emsrt::runtime {
namespace {

using wire::FeedbackKind;
using wire::FeedbackMessage;

FeedbackMessage msg(FeedbackKind kind, std::uint32_t id) {
  FeedbackMessage m;
  m.kind = kind;
  m.window_id = id;
  m.label = "x";
  return m;
}

TEST(FeedbackQueue, MatchesTwoQueueModel) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    FeedbackQueue q;
    std::deque<std::uint32_t> model_p, model_i;
    std::uint32_t next = 0;
    for (int op = 0; op < 60; ++op) {
      if (rng.uniform() < 0.6) {
        const bool proto = rng.uniform() < 0.5;
        const auto receipt = q.submit(msg(proto ? FeedbackKind::Protocol : FeedbackKind::Intervention, next));
        EXPECT_EQ(receipt.sequence, next);
        (proto ? model_p : model_i).push_back(next++);
      } else {
        const auto got = q.pop_for(std::chrono::milliseconds(0));
        if (model_p.empty() && model_i.empty()) {
          EXPECT_FALSE(got);
          continue;
        }
        ASSERT_TRUE(got);
        auto& src = model_p.empty() ? model_i : model_p;
        EXPECT_EQ(got->window_id, src.front());
        EXPECT_EQ(got->kind, model_p.empty() ? FeedbackKind::Intervention : FeedbackKind::Protocol);
        src.pop_front();
      }
    }
    EXPECT_EQ(q.size(), model_p.size() + model_i.size());
  }
}

TEST(FeedbackQueue, CloseRejectsSubmitAndDrains) {
  FeedbackQueue q;
  q.submit(msg(FeedbackKind::Intervention, 1));
  q.close();
  EXPECT_THROW(q.submit(msg(FeedbackKind::Protocol, 2)), Rejected);
  EXPECT_TRUE(q.pop());
  EXPECT_FALSE(q.pop());
}

TEST(FeedbackQueue, PopWakesOnSubmit) {
  FeedbackQueue q;
  std::thread producer([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    q.submit(msg(FeedbackKind::Protocol, 7));
  });
  const auto got = q.pop();
  producer.join();
  ASSERT_TRUE(got);
  EXPECT_EQ(got->window_id, 7u);
}

TEST(Slo, NearestRankOracle) {
  Rng rng(2);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::int64_t> v(1 + rng.below(50));
    for (auto& x : v) x = static_cast<std::int64_t>(rng.below(1000));
    std::sort(v.begin(), v.end());
    for (double p : {0.5, 0.95, 1.0}) {
      // Smallest value with at least p*n samples at or below it.
      std::int64_t expected = v.back();
      for (std::int64_t cand : v) {
        const auto at_or_below = std::count_if(v.begin(), v.end(), [&](auto x) { return x <= cand; });
        if (static_cast<double>(at_or_below) >= p * static_cast<double>(v.size()) - 1e-9) {
          expected = cand;
          break;
        }
      }
      EXPECT_EQ(nearest_rank(v, p), expected);
    }
  }
}

LatencyTrace trace(std::uint32_t id, std::int64_t asr_start, std::int64_t latency) {
  LatencyTrace t;
  t.window_id = id;
  t.t_window_ready = asr_start;
  t.t_asr_start = asr_start;
  t.t_asr_done = asr_start + latency / 2;
  t.t_protocol_start = asr_start + latency / 2;
  t.t_protocol_done = asr_start + latency / 2;
  t.t_feedback_enqueued = asr_start + latency / 2;
  t.t_feedback_dequeued = asr_start + latency / 2;
  t.t_feedback_sent = asr_start + latency;
  return t;
}

TEST(Slo, ViolationIsStrictlyGreaterThanTarget) {
  const auto r = finalize_slo({trace(0, 0, 4'000'000), trace(1, 0, 4'000'001), trace(2, 0, 100)});
  EXPECT_EQ(r.violations, std::vector<std::uint32_t>{1});
  ASSERT_EQ(r.windows.size(), 3u);
  EXPECT_FALSE(r.windows[0].violation);
  EXPECT_EQ(r.stages.at("protocol_feedback").max, 4'000'001);
}

TEST(Slo, OutOfOrderTraceNamesWindowAndField) {
  auto bad = trace(5, 100, 1000);
  bad.t_asr_done = 50;
  try {
    finalize_slo({trace(0, 0, 10), bad});
    FAIL();
  } catch (const TraceError& e) {
    EXPECT_NE(std::string(e.what()).find("window 5"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("t_asr_done"), std::string::npos);
  }
}

TEST(Slo, TracesMissingEndpointsAreExcluded) {
  LatencyTrace partial;
  partial.window_id = 3;
  partial.t_asr_start = 10;
  const auto r = finalize_slo({partial, trace(4, 0, 10)});
  ASSERT_EQ(r.windows.size(), 1u);
  EXPECT_EQ(r.windows[0].window_id, 4u);
}

TEST(Artifacts, StableFilesRoundTrip) {
  testing::TempDir tmp;
  {
    ArtifactWriter w(tmp.path());
    protocol::RankedPrediction p;
    p.window_id = 2;
    p.entries = {{"a, with comma", 0.75, 1.5}, {"b \"quoted\"", 0.25, 0.0}};
    p.low_information = false;
    w.prediction(p);
    w.transcript({2, "hello\tworld", "replay", 0, true});
    vision::InterventionPrediction ip;
    ip.frame_id = 11;
    ip.capture_ts_us = 2'200'000;
    ip.label = "CPR";
    ip.score = 0.6;
    ip.window_id = 2;
    w.interventions("a, with comma", {ip});
    w.trace(trace(2, 5, 50));
  }
  const auto preds = read_predictions(tmp / kPredictionsFile);
  ASSERT_EQ(preds.at(2).size(), 2u);
  EXPECT_EQ(preds.at(2)[0].protocol_id, "a, with comma");
  EXPECT_EQ(preds.at(2)[1].protocol_id, "b \"quoted\"");
  EXPECT_DOUBLE_EQ(preds.at(2)[0].confidence, 0.75);
  EXPECT_EQ(read_transcripts(tmp / kTranscriptsFile).at(2), "hello world");
  const auto ivs = read_interventions(tmp / kInterventionsFile);
  ASSERT_EQ(ivs.size(), 1u);
  EXPECT_EQ(ivs[0].label, "CPR");
  EXPECT_EQ(ivs[0].capture_ts_us, 2'200'000u);
  EXPECT_EQ(read_traces(tmp / kTracesFile), std::vector<LatencyTrace>{trace(2, 5, 50)});
}

TEST(Artifacts, EmptyDirectoryDisablesWriting) {
  ArtifactWriter w("");
  EXPECT_FALSE(w.enabled());
  w.transcript({0, "x", "y", 0, false});
}

// Drives a pipeline with an unpaced packet stream built from a synthetic scenario.
struct Harness {
  testing::TempDir tmp;
  sim::ScenarioManifest manifest;
  std::shared_ptr<wire::AudioQueue> audio = std::make_shared<wire::AudioQueue>(4096);
  std::shared_ptr<wire::FrameQueue> frames = std::make_shared<wire::FrameQueue>(4096);

  explicit Harness(int duration_s = 60) {
    sim::SynthSpec spec;
    spec.scenario_id = "h";
    spec.duration_s = duration_s;
    spec.patient_age = 60;
    manifest = sim::write_synthetic_scenario(tmp / "scenario", spec);
  }

  ScenarioTruth truth() const {
    return {manifest.transcript_alignment, vision::InterventionTimeline(manifest.ground_truth_interventions)};
  }

  void feed() {
    for (const auto& p : sim::packetize(sim::read_wav(manifest.audio_path))) audio->push(p);
    for (const auto& f : manifest.frames) {
      wire::VideoFrame vf{f.frame_id, static_cast<std::uint64_t>(std::llround(f.timestamp_s * 1e6)), sim::read_frame(manifest, f)};
      frames->push(vf);
    }
    audio->close();
    frames->close();
  }
};

TEST(Pipeline, SixtySecondsGiveFifteenProtocolFeedbacks) {
  Harness h;
  std::mutex mu;
  std::vector<FeedbackMessage> sent;
  PipelineConfig cfg;
  cfg.run_dir = h.tmp / "run";
  Pipeline p(cfg, testing::reference_kb(), make_stages({}, testing::reference_kb(), h.truth()), h.audio, h.frames,
             [&](const std::vector<std::uint8_t>&, const FeedbackMessage& m) {
               std::lock_guard lock(mu);
               sent.push_back(m);
             });
  p.start();
  h.feed();
  const auto r = p.wait();
  ASSERT_TRUE(r.ok()) << r.error;
  std::vector<std::uint32_t> protocol_windows;
  for (const auto& m : sent)
    if (m.kind == FeedbackKind::Protocol) protocol_windows.push_back(m.window_id);
  std::vector<std::uint32_t> expected(15);
  std::iota(expected.begin(), expected.end(), 0u);
  EXPECT_EQ(protocol_windows, expected);
  EXPECT_EQ(r.summary.windows, 15u);
  EXPECT_EQ(r.summary.protocol_feedbacks, 15u);
  EXPECT_EQ(r.traces.size(), 15u);
  for (const auto& t : r.traces) EXPECT_EQ(first_ordering_violation(t), "");
  EXPECT_EQ(read_traces(h.tmp / "run" / kTracesFile).size(), 15u);
  EXPECT_TRUE(std::filesystem::exists(h.tmp / "run" / kSloFile));
  EXPECT_TRUE(std::filesystem::exists(h.tmp / "run" / kSummaryFile));
  EXPECT_TRUE(std::filesystem::exists(h.tmp / "run" / kRunInfoFile));
}

TEST(Pipeline, FlushPartialWindowAddsOne) {
  Harness h;
  PipelineConfig cfg;
  cfg.flush_partial_window = true;
  Pipeline p(cfg, testing::reference_kb(), make_stages({}, testing::reference_kb(), h.truth()), h.audio, h.frames,
             nullptr);
  p.start();
  h.feed();
  const auto r = p.wait();
  ASSERT_TRUE(r.ok()) << r.error;
  EXPECT_EQ(r.summary.windows, 16u);
}

TEST(Pipeline, VisionNoneDisablesClassifier) {
  Harness h(16);
  StageSelection sel;
  sel.vision = "none";
  PipelineConfig cfg;
  Pipeline p(cfg, testing::reference_kb(), make_stages(sel, testing::reference_kb(), h.truth()), h.audio, h.frames,
             nullptr);
  p.start();
  h.feed();
  const auto r = p.wait();
  ASSERT_TRUE(r.ok()) << r.error;
  EXPECT_EQ(r.summary.classifier_calls, 0u);
  EXPECT_EQ(r.summary.intervention_feedbacks, 0u);
  EXPECT_EQ(r.summary.protocol_feedbacks, 4u);
}

class ExplodingTranscriber final : public audio::Transcriber {
 public:
  audio::TranscriptSegment transcribe(const audio::AudioWindow& w) override {
    if (w.window_id == 2) throw AdapterError("engine crashed");
    return {w.window_id, "", "boom", 0, false};
  }
  std::string id() const override { return "boom"; }
};

TEST(Pipeline, StageFailureSurfacesFromWaitWithoutHanging) {
  Harness h(60);
  auto stages = make_stages({}, testing::reference_kb(), h.truth());
  stages.transcriber = std::make_unique<ExplodingTranscriber>();
  Pipeline p(PipelineConfig{}, testing::reference_kb(), std::move(stages), h.audio, h.frames, nullptr);
  p.start();
  h.feed();
  const auto r = p.wait();
  EXPECT_FALSE(r.ok());
  EXPECT_NE(r.error.find("engine crashed"), std::string::npos);
}

TEST(Pipeline, RejectsBadConfig) {
  Harness h(4);
  PipelineConfig cfg;
  cfg.gate_threshold = 1.5;
  EXPECT_THROW(Pipeline(cfg, testing::reference_kb(), make_stages({}, testing::reference_kb(), h.truth()), h.audio,
                        h.frames, nullptr),
               ConfigError);
  cfg = {};
  cfg.window_samples = 0;
  EXPECT_THROW(Pipeline(cfg, testing::reference_kb(), make_stages({}, testing::reference_kb(), h.truth()), h.audio,
                        h.frames, nullptr),
               ConfigError);
}

TEST(Stages, UnknownSelectionIsAConfigError) {
  StageSelection sel;
  sel.asr = "whisper";
  EXPECT_THROW(make_stages(sel, testing::reference_kb(), {}), ConfigError);
  EXPECT_THROW(parse_confusion("sometimes"), ConfigError);
  EXPECT_EQ(parse_confusion("vocabulary"), vision::ConfusionModel::VocabularyUniform);
}

}  // namespace
}  // namespace emsrt::runtime
