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

#include "emsrt/eval/evaluate.hpp"
#include "emsrt/eval/metrics.hpp"
#include "emsrt/runtime/artifacts.hpp"
#include "emsrt/sim/synth.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace emsrt::eval {
namespace {

using audio::NormalizationProfile;

TEST(Wer, KnownValues) {
  EXPECT_DOUBLE_EQ(wer("the patient is stable", "the patient stable"), 0.25);
  EXPECT_DOUBLE_EQ(wer("Chest pain.", "chest PAIN"), 0.0);
  EXPECT_DOUBLE_EQ(wer("a b", "c d e"), 1.5);
  EXPECT_DOUBLE_EQ(wer("", ""), 0.0);
  EXPECT_DOUBLE_EQ(wer("", "two words"), 2.0);
  EXPECT_DOUBLE_EQ(wer("gave 324 mg", "gave three hundred twenty four mg", NormalizationProfile::LimitedVocab), 0.0);
}

TEST(Cer, CountsCodePoints) {
  EXPECT_DOUBLE_EQ(cer("abcd", "abed"), 0.25);
  EXPECT_EQ(code_points("né").size(), 2u);
  EXPECT_DOUBLE_EQ(cer("né", "ne"), 0.5);
}

TEST(Wer, MatchesNaiveOracle) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const auto ref = testing::random_sentence(rng, 6), hyp = testing::random_sentence(rng, 6);
    EXPECT_EQ(wer(ref, hyp), testing::naive_rate(tokenize(ref), tokenize(hyp))) << ref << " | " << hyp;
  }
}

TEST(Cer, MatchesNaiveOracle) {
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const auto ref = testing::random_chars(rng, 6), hyp = testing::random_chars(rng, 6);
    const auto r = code_points(audio::normalize_text(ref, NormalizationProfile::Standard));
    const auto h = code_points(audio::normalize_text(hyp, NormalizationProfile::Standard));
    EXPECT_EQ(cer(ref, hyp), testing::naive_rate(r, h)) << ref << " | " << hyp;
  }
}

TEST(F1, KnownValues) {
  std::vector<LabelInstance> xs = {
      {{"a"}, {{"a", 0.9}, {"b", 0.6}}},
      {{"b"}, {{"a", 0.7}, {"b", 0.2}}},
  };
  // a: tp 1 fp 1; b: fp 1 fn 1.
  EXPECT_DOUBLE_EQ(micro_f1(xs), 2.0 / (2 + 2 + 1));
  EXPECT_DOUBLE_EQ(macro_f1(xs), (2.0 / 3 + 0.0) / 2);
  EXPECT_DOUBLE_EQ(macro_f1(xs, 0.5, std::set<std::string>{"a", "b", "c", "d"}), (2.0 / 3) / 4);
  EXPECT_DOUBLE_EQ(micro_f1({}), 0.0);
}

TEST(F1, MatchesConfusionOracle) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    std::vector<LabelInstance> xs;
    for (auto n = 1 + rng.below(6); n > 0; --n) xs.push_back(testing::random_instance(rng));
    for (double th : {0.5, 0.0, 0.75}) {
      EXPECT_EQ(micro_f1(xs, th), testing::naive_micro_f1(xs, th));
      EXPECT_EQ(macro_f1(xs, th), testing::naive_macro_f1(xs, th));
    }
  }
}

TEST(AccAtK, KnownValuesAndTieBreak) {
  std::vector<LabelInstance> xs = {
      {{"b"}, {{"a", 0.5}, {"b", 0.5}, {"c", 0.9}}},
      {{"z"}, {{"a", 0.5}}},
  };
  EXPECT_EQ(top_k(xs[0], 2), (std::vector<std::string>{"c", "a"}));
  EXPECT_DOUBLE_EQ(acc_at_k(xs, 2), 0.0);
  EXPECT_DOUBLE_EQ(acc_at_k(xs, 3), 0.5);
}

TEST(AccAtK, AllLabelsRuleIsStricter) {
  std::vector<LabelInstance> xs = {{{"a", "b"}, {{"a", 0.9}, {"c", 0.8}, {"b", 0.1}}}};
  EXPECT_DOUBLE_EQ(acc_at_k(xs, 1, HitRule::AnyLabel), 1.0);
  EXPECT_DOUBLE_EQ(acc_at_k(xs, 1, HitRule::AllLabels), 0.0);
  EXPECT_DOUBLE_EQ(acc_at_k(xs, 3, HitRule::AllLabels), 1.0);
}

TEST(AccAtK, MatchesOracleAndIsMonotone) {
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    std::vector<LabelInstance> xs;
    for (auto n = 1 + rng.below(6); n > 0; --n) xs.push_back(testing::random_instance(rng));
    double prev = 0;
    for (std::size_t k = 1; k <= 7; ++k) {
      const double a = acc_at_k(xs, k);
      EXPECT_EQ(a, testing::naive_acc_at_k(xs, k));
      EXPECT_GE(a, prev);
      prev = a;
    }
  }
}

TEST(InterventionAccuracy, MissingPredictionsCountAsWrong) {
  const auto r = intervention_accuracy({{1, "a"}, {2, "b"}}, {{1, "a"}, {2, "a"}, {3, "a"}});
  EXPECT_EQ(r.frames, 3u);
  EXPECT_EQ(r.correct, 1u);
  EXPECT_DOUBLE_EQ(r.overall, 1.0 / 3);
  EXPECT_EQ(r.per_label.at("a"), (std::pair<std::size_t, std::size_t>{1, 3}));
}

TEST(ScenarioSeed, DependsOnScenarioAndSeed) {
  EXPECT_EQ(scenario_seed(1, "a"), scenario_seed(1, "a"));
  EXPECT_NE(scenario_seed(1, "a"), scenario_seed(1, "b"));
  EXPECT_NE(scenario_seed(1, "a"), scenario_seed(2, "a"));
}

TEST(RunEval, ScoresCleanScenarioPerfectly) {
  testing::TempDir tmp;
  sim::SynthSpec spec;
  spec.scenario_id = "e1";
  spec.duration_s = 16;
  spec.patient_age = 50;
  sim::write_synthetic_scenario(tmp / "e1", spec);
  EvalConfig cfg;
  cfg.replay = {16.0, true};
  const auto report = run_eval({tmp / "e1"}, testing::reference_kb(), cfg, tmp / "out");
  ASSERT_TRUE(report.ok()) << report.scenarios[0].error;
  EXPECT_EQ(report.wer, 0.0);
  EXPECT_EQ(report.acc_at_k.at(1), 1.0);
  EXPECT_EQ(report.intervention_accuracy, 1.0);
  EXPECT_TRUE(std::filesystem::exists(tmp / "out" / kReportFile));
  EXPECT_TRUE(std::filesystem::exists(tmp / "out" / kPerformanceFile));
  EXPECT_TRUE(std::filesystem::exists(tmp / "out" / kLatencyFile));
  EXPECT_TRUE(std::filesystem::exists(tmp / "out" / "runs" / "e1" / runtime::kPredictionsFile));
}

TEST(RunEval, BadScenarioIsReportedNotFatal) {
  testing::TempDir tmp;
  std::filesystem::create_directories(tmp / "broken");
  testing::write_file(tmp / "broken" / "scenario.json", R"({"scenario_id": "broken", "audio": "missing.wav"})");
  const auto report = run_eval({tmp / "broken"}, testing::reference_kb(), EvalConfig{}, tmp / "out");
  ASSERT_EQ(report.scenarios.size(), 1u);
  EXPECT_FALSE(report.ok());
  EXPECT_FALSE(report.scenarios[0].error.empty());
}

}  // namespace
}  // namespace emsrt::eval
