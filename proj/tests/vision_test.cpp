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

#include <map>

#include "emsrt/common/error.hpp"
#include "emsrt/common/line_channel.hpp"
#include "emsrt/sim/synth.hpp"
#include "emsrt/vision/intervention.hpp"
#include "test_support.hpp"

namespace emsrt::vision {
namespace {

using protocol::RankedPrediction;

OracleClassifier::Options noise(double epsilon, std::uint64_t seed) {
  OracleClassifier::Options o;
  o.epsilon = epsilon;
  o.seed = seed;
  return o;
}

RankedPrediction ranking(const std::string& top, double confidence) {
  RankedPrediction p;
  p.entries.push_back({top, confidence, 1.0});
  p.entries.push_back({"general - universal patient care (protocol 1 - 1)", confidence / 2, 0.0});
  return p;
}

std::vector<wire::VideoFrame> frames(std::uint32_t n, std::uint64_t start_us = 0) {
  std::vector<wire::VideoFrame> out;
  for (std::uint32_t i = 0; i < n; ++i) out.push_back({i, start_us + i * 200'000ULL, {1, 2, 3}});
  return out;
}

TEST(Gate, ThresholdIsInclusive) {
  EXPECT_TRUE(gate(ranking("a", 0.5), 0.5));
  EXPECT_FALSE(gate(ranking("a", 0.49), 0.5));
  EXPECT_FALSE(gate(RankedPrediction{}, 0.0));
  EXPECT_TRUE(gate(ranking("a", 0.0), 0.0));
  EXPECT_FALSE(gate(ranking("a", 0.999), 1.0));
}

TEST(Candidates, FollowKbOrder) {
  const auto c = candidate_interventions(testing::reference_kb(), sim::kChestPainProtocol);
  EXPECT_EQ(c.labels, (std::vector<std::string>{"Attaching Defibrillator", "Inserting IV to arm", "Inserting IV to leg",
                                                "Defibrillator"}));
  EXPECT_THROW(candidate_interventions(testing::reference_kb(), "no such protocol"), UnknownProtocol);
  EXPECT_THROW(candidate_interventions(testing::reference_kb(), "general - universal patient care (protocol 1 - 1)"),
               EmptyCandidates);
}

TEST(Timeline, FirstMatchingIntervalWins) {
  InterventionTimeline t({{1.0, 2.0, "a"}, {1.5, 3.0, "b"}});
  EXPECT_EQ(t.label_at(500'000), std::nullopt);
  EXPECT_EQ(t.label_at(1'000'000), "a");
  EXPECT_EQ(t.label_at(1'700'000), "a");
  EXPECT_EQ(t.label_at(2'000'000), "b");
  EXPECT_EQ(t.label_at(3'000'000), std::nullopt);
}

const std::vector<std::string> kLabels = {"A", "B", "C", "D"};

TEST(OracleClassifier, ZeroNoiseReturnsTruth) {
  OracleClassifier o(InterventionTimeline({{0, 100, "C"}}), noise(0.0, 1));
  for (std::uint32_t f = 0; f < 100; ++f) EXPECT_EQ(o.pick(f, "C", kLabels), "C");
}

TEST(OracleClassifier, FullNoiseNeverReturnsTruthInCandidateMode) {
  OracleClassifier o({}, noise(1.0, 1));
  for (std::uint32_t f = 0; f < 200; ++f) EXPECT_NE(o.pick(f, "C", kLabels), "C");
}

TEST(OracleClassifier, DeterministicPerFrameAndOrderFree) {
  OracleClassifier a({}, noise(0.5, 9)), b({}, noise(0.5, 9)), c({}, noise(0.5, 10));
  std::vector<std::string> forward, backward;
  for (std::uint32_t f = 0; f < 300; ++f) forward.push_back(a.pick(f, "B", kLabels));
  for (std::uint32_t f = 300; f-- > 0;) backward.push_back(b.pick(f, "B", kLabels));
  std::reverse(backward.begin(), backward.end());
  EXPECT_EQ(forward, backward);
  std::size_t differ = 0;
  for (std::uint32_t f = 0; f < 300; ++f) differ += c.pick(f, "B", kLabels) != forward[f];
  EXPECT_GT(differ, 0u);
}

TEST(OracleClassifier, UnknownTruthIsUniformOverCandidates) {
  OracleClassifier o({}, noise(0.0, 3));
  std::map<std::string, int> hist;
  for (std::uint32_t f = 0; f < 8000; ++f) ++hist[o.pick(f, std::nullopt, kLabels)];
  ASSERT_EQ(hist.size(), 4u);
  for (const auto& [_, n] : hist) EXPECT_NEAR(n, 2000, 200);
}

TEST(OracleClassifier, CandidateModeAccuracyIsOneMinusEpsilon) {
  OracleClassifier o({}, noise(0.3, 4));
  int correct = 0;
  for (std::uint32_t f = 0; f < 20000; ++f) correct += o.pick(f, "A", kLabels) == "A";
  EXPECT_NEAR(correct / 20000.0, 0.7, 0.015);
}

TEST(OracleClassifier, VocabularyModeAccuracyMatchesFormula) {
  const std::vector<std::string> vocab = {"A", "B", "C", "D", "E", "F", "G", "H"};
  OracleClassifier::Options opts{0.4, 5, ConfusionModel::VocabularyUniform, vocab};
  OracleClassifier o({}, opts);
  int small = 0, full = 0;
  const int n = 20000;
  for (std::uint32_t f = 0; f < static_cast<std::uint32_t>(n); ++f) {
    small += o.pick(f, "A", kLabels) == "A";
    full += o.pick(f, "A", vocab) == "A";
  }
  EXPECT_NEAR(small / double(n), 1.0 - 0.4 * 3.0 / 7.0, 0.015);
  EXPECT_NEAR(full / double(n), 0.6, 0.015);
}

TEST(OracleClassifier, ScoreIsOneMinusEpsilon) {
  OracleClassifier o(InterventionTimeline({{0, 10, "A"}}), noise(0.25, 1));
  const auto p = o.classify({3, 1'000'000, {}}, {"x", kLabels});
  ASSERT_TRUE(p);
  EXPECT_DOUBLE_EQ(p->score, 0.75);
  EXPECT_EQ(p->frame_id, 3u);
  EXPECT_EQ(o.calls(), 1u);
}

TEST(ProcessWindow, GateClosedMeansNoCalls) {
  OracleClassifier o({}, noise(0.0, 1));
  const auto out = process_window(frames(10), ranking(sim::kChestPainProtocol, 0.7), testing::reference_kb(), 0.8, o);
  EXPECT_FALSE(out.gated_open);
  EXPECT_EQ(out.skip_reason, "gate_closed");
  EXPECT_EQ(o.calls(), 0u);
  EXPECT_TRUE(out.predictions.empty());
}

TEST(ProcessWindow, VisionDisabledProtocolSkips) {
  OracleClassifier o({}, noise(0.0, 1));
  const auto out = process_window(frames(10), ranking("general - universal patient care (protocol 1 - 1)", 0.9),
                                  testing::reference_kb(), 0.5, o);
  EXPECT_TRUE(out.gated_open);
  EXPECT_EQ(out.skip_reason, "vision_disabled");
  EXPECT_EQ(o.calls(), 0u);
}

TEST(ProcessWindow, OnePredictionPerFrame) {
  OracleClassifier o(InterventionTimeline({{0, 100, "Defibrillator"}}), noise(0.0, 1));
  const auto out = process_window(frames(20), ranking(sim::kChestPainProtocol, 0.9), testing::reference_kb(), 0.5, o);
  EXPECT_TRUE(out.gated_open);
  EXPECT_EQ(out.protocol_id, sim::kChestPainProtocol);
  ASSERT_EQ(out.predictions.size(), 20u);
  EXPECT_EQ(out.classifier_calls, 20u);
  for (const auto& p : out.predictions) EXPECT_EQ(p.label, "Defibrillator");
}

TEST(ProcessWindow, NoFramesReason) {
  OracleClassifier o({}, noise(0.0, 1));
  const auto out = process_window({}, ranking(sim::kChestPainProtocol, 0.9), testing::reference_kb(), 0.5, o);
  EXPECT_EQ(out.skip_reason, "no_frames");
}

TEST(AdapterClassifier, AnswersAndTimeouts) {
  AdapterClassifier good(open_line_channel(testing::fake_adapter("vision")), std::chrono::milliseconds(3000));
  const auto p = good.classify({1, 0, {9, 9}}, {"x", kLabels});
  ASSERT_TRUE(p);
  EXPECT_EQ(p->label, "A");
  EXPECT_DOUBLE_EQ(p->score, 0.5);

  AdapterClassifier slow(open_line_channel(testing::fake_adapter("vision", "--delay-ms 300")),
                         std::chrono::milliseconds(20));
  EXPECT_FALSE(slow.classify({1, 0, {9}}, {"x", kLabels}));
  EXPECT_EQ(slow.skipped(), 1u);
}

TEST(AdapterClassifier, NonCandidateLabelIsAnError) {
  testing::TempDir tmp;
  testing::write_file(tmp / "r.json", R"({"label":"Z","score":0.9})");
  AdapterClassifier c(open_line_channel(testing::fake_adapter("vision", "--response " + (tmp / "r.json").string())),
                      std::chrono::milliseconds(3000));
  EXPECT_THROW(c.classify({1, 0, {9}}, {"x", kLabels}), AdapterError);
}

}  // namespace
}  // namespace emsrt::vision
