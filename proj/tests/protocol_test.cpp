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

#include "emsrt/common/error.hpp"
#include "emsrt/common/line_channel.hpp"
#include "emsrt/protocol/incident.hpp"
#include "emsrt/protocol/knowledge_base.hpp"
#include "emsrt/protocol/predictor.hpp"
#include "emsrt/protocol/ranking.hpp"
#include "test_support.hpp"

namespace emsrt::protocol {
namespace {

using nlohmann::json;

// Three scoring units: the seizure group, "cardiac" and "stroke".
json toy_kb() {
  auto protocol = [](const std::string& id, bool vision = false) {
    return json{{"id", id}, {"kind", "protocol"}, {"name", id}, {"vision_enabled", vision}};
  };
  auto node = [](const std::string& id, const std::string& kind, const std::string& name, json terms = json::array()) {
    return json{{"id", id}, {"kind", kind}, {"name", name}, {"terms", terms}};
  };
  auto edge = [](const std::string& src, const std::string& dst, const std::string& rel) {
    return json{{"src", src}, {"dst", dst}, {"relation", rel}};
  };
  return {
      {"version", 1},
      {"nodes",
       {protocol("cardiac", true), protocol("stroke"), protocol("seizure adult"), protocol("seizure pediatric"),
        node("s:chest pain", "symptom", "chest pain", {"cp"}), node("s:weakness", "symptom", "weakness"),
        node("s:slurred", "symptom", "slurred speech"), node("s:convulsion", "symptom", "convulsion", {"fitting"}),
        node("m:aspirin", "medication", "aspirin"), node("p:defib", "procedure", "defibrillation")}},
      {"edges",
       {edge("cardiac", "s:chest pain", "has_symptom"), edge("cardiac", "s:weakness", "has_symptom"),
        edge("cardiac", "m:aspirin", "uses_medication"), edge("stroke", "s:weakness", "has_symptom"),
        edge("stroke", "s:slurred", "has_symptom"), edge("seizure adult", "s:convulsion", "has_symptom"),
        edge("seizure pediatric", "s:convulsion", "has_symptom"),
        edge("cardiac", "p:defib", "has_intervention")}},
      {"groups", {{{"group_id", "group: seizure"}, {"adult_protocol_id", "seizure adult"},
                   {"pediatric_protocol_id", "seizure pediatric"}}}},
      {"interventions", {{"cardiac", {"Defibrillator", "CPR"}}}},
  };
}

bool has_rule(const std::vector<std::string>& v, const std::string& prefix) {
  return std::any_of(v.begin(), v.end(), [&](const std::string& s) { return s.rfind(prefix, 0) == 0; });
}

TEST(KnowledgeBase, ToyLoads) {
  const auto kb = KnowledgeBase::from_json(toy_kb());
  EXPECT_EQ(kb.protocol_ids(), (std::vector<std::string>{"cardiac", "seizure adult", "seizure pediatric", "stroke"}));
  EXPECT_TRUE(kb.is_protocol("stroke"));
  EXPECT_FALSE(kb.is_protocol("s:weakness"));
  ASSERT_NE(kb.group_of("seizure pediatric"), nullptr);
  EXPECT_EQ(kb.group_of("seizure pediatric")->group_id, "group: seizure");
  EXPECT_EQ(kb.group_of("cardiac"), nullptr);
  const auto ev = kb.evidence_of("cardiac");
  EXPECT_EQ(ev.size(), 3u) << "intervention procedures are not lexical evidence";
}

TEST(KnowledgeBase, ReferenceKbIsValid) {
  const auto& kb = testing::reference_kb();
  EXPECT_EQ(kb.protocol_ids().size(), 43u);
  EXPECT_EQ(kb.groups().size(), 6u);
  EXPECT_EQ(kb.intervention_vocabulary().size(), 8u);
}

struct RuleCase {
  const char* rule;
  std::function<void(json&)> corrupt;
};

TEST(KnowledgeBase, EachRuleIsReportedByName) {
  const std::vector<RuleCase> cases = {
      {"schema", [](json& d) { d["nodes"][0]["kind"] = "organ"; }},
      {"schema", [](json& d) { d["edges"] = "none"; }},
      {"duplicate node id", [](json& d) { d["nodes"].push_back(d["nodes"][1]); }},
      {"protocol required",
       [](json& d) {
         json only;
         for (auto& n : d["nodes"])
           if (n["kind"] != "protocol") only.push_back(n);
         d["nodes"] = only;
         d["edges"] = json::array();
         d["groups"] = json::array();
         d["interventions"] = json::object();
       }},
      {"edge endpoint", [](json& d) { d["edges"][0]["dst"] = "s:missing"; }},
      {"edge kind", [](json& d) { d["edges"][2]["relation"] = "has_symptom"; }},
      {"duplicate group id", [](json& d) {
         d["nodes"].push_back({{"id", "x1"}, {"kind", "protocol"}});
         d["nodes"].push_back({{"id", "x2"}, {"kind", "protocol"}});
         d["groups"].push_back({{"group_id", "group: seizure"}, {"adult_protocol_id", "x1"}, {"pediatric_protocol_id", "x2"}});
       }},
      {"group id", [](json& d) { d["groups"][0]["group_id"] = "stroke"; }},
      {"group member", [](json& d) { d["groups"][0]["pediatric_protocol_id"] = "s:weakness"; }},
      {"single group", [](json& d) { d["groups"][0]["pediatric_protocol_id"] = "seizure adult"; }},
      {"intervention owner", [](json& d) { d["interventions"]["s:weakness"] = {"CPR"}; }},
      {"intervention labels", [](json& d) { d["interventions"]["cardiac"] = {"CPR", "CPR"}; }},
      {"vision enabled", [](json& d) { d["nodes"][1]["vision_enabled"] = true; }},
  };
  EXPECT_TRUE(validate_knowledge_base(toy_kb()).empty());
  for (const auto& c : cases) {
    auto doc = toy_kb();
    c.corrupt(doc);
    const auto v = validate_knowledge_base(doc);
    EXPECT_TRUE(has_rule(v, c.rule)) << c.rule << " not reported; got " << json(v).dump();
    EXPECT_THROW(KnowledgeBase::from_json(doc), SchemaError) << c.rule;
  }
}

double expected_confidence(double scaled) { return 1.0 / (1.0 + std::exp(-4.0 * (scaled - 0.5))); }

TEST(LexicalScorer, MatchesHandComputedScores) {
  const auto kb = KnowledgeBase::from_json(toy_kb());
  const LexicalScorer scorer(kb);
  // Units: group: seizure, cardiac, stroke. weakness is shared by two units.
  const double rare = std::log(1.0 + 3.0 / 1.0);
  const double shared = std::log(1.0 + 3.0 / 2.0);
  EXPECT_DOUBLE_EQ(scorer.idf("s:chest pain"), rare);
  EXPECT_DOUBLE_EQ(scorer.idf("s:weakness"), shared);
  EXPECT_DOUBLE_EQ(scorer.idf("s:convulsion"), rare) << "group members count as one unit";

  const auto p = scorer.predict("Complains of CP and weakness.", 2);
  ASSERT_EQ(p.entries.size(), 3u);
  EXPECT_FALSE(p.low_information);
  EXPECT_EQ(p.window_id, 2u);
  EXPECT_EQ(p.entries[0].protocol_id, "cardiac");
  EXPECT_DOUBLE_EQ(p.entries[0].raw_score, rare + shared);
  EXPECT_DOUBLE_EQ(p.entries[0].confidence, expected_confidence(1.0));
  EXPECT_EQ(p.entries[1].protocol_id, "stroke");
  EXPECT_DOUBLE_EQ(p.entries[1].confidence, expected_confidence(shared / (rare + shared)));
  EXPECT_EQ(p.entries[2].protocol_id, "group: seizure");
  EXPECT_DOUBLE_EQ(p.entries[2].confidence, expected_confidence(0.0));
}

TEST(LexicalScorer, WholeWordMatchingOnly) {
  const auto kb = KnowledgeBase::from_json(toy_kb());
  const LexicalScorer scorer(kb);
  const auto p = scorer.predict("cpr in progress", 0);
  EXPECT_TRUE(p.low_information) << "'cp' must not match inside 'cpr'";
}

TEST(LexicalScorer, EmptyTextIsLowInformationWithIdTieBreak) {
  const auto kb = KnowledgeBase::from_json(toy_kb());
  const auto p = LexicalScorer(kb).predict("", 0);
  EXPECT_TRUE(p.low_information);
  ASSERT_EQ(p.entries.size(), 3u);
  EXPECT_EQ(p.entries[0].protocol_id, "cardiac");
  EXPECT_EQ(p.entries[1].protocol_id, "group: seizure");
  EXPECT_EQ(p.entries[2].protocol_id, "stroke");
  for (const auto& e : p.entries) EXPECT_DOUBLE_EQ(e.confidence, expected_confidence(0.0));
}

TEST(Refine, MapsGroupsByAge) {
  const auto kb = KnowledgeBase::from_json(toy_kb());
  const auto coarse = LexicalScorer(kb).predict("patient fitting", 0);
  ASSERT_EQ(coarse.top()->protocol_id, "group: seizure");
  for (auto [age, expected] : std::vector<std::pair<std::optional<int>, std::string>>{
           {12, "seizure pediatric"}, {18, "seizure pediatric"}, {19, "seizure adult"}, {std::nullopt, "seizure adult"}}) {
    IncidentState s;
    s.extracted_age = age;
    const auto fine = refine(coarse, s, kb);
    EXPECT_EQ(fine.top()->protocol_id, expected);
    EXPECT_EQ(fine.entries.size(), coarse.entries.size());
  }
}

TEST(ExtractAge, Patterns) {
  const std::vector<std::pair<std::string, std::optional<int>>> table = {
      {"54 year old male", 54},     {"a 7-year-old girl", 7},  {"pt is 80 years old", 80},
      {"12 yo with asthma", 12},    {"45 y/o female", 45},     {"3 y.o. child", 3},
      {"age 61, conscious", 61},    {"Aged 33", 33},           {"67 yr old", 67},
      {"took 2 pills, 40 yo", 40},  {"bp 120 over 80", std::nullopt},
      {"150 year old tree", std::nullopt},
      {"aged 150 then 30 yo", 30},
  };
  for (const auto& [text, age] : table) EXPECT_EQ(extract_age(text), age) << text;
}

TEST(Accumulate, AppendsAndRejectsRepeats) {
  IncidentState s;
  s = accumulate(s, {0, "called for chest pain", "t", 0, false});
  s = accumulate(s, {1, "", "t", 0, false});
  s = accumulate(s, {2, "58 year old", "t", 0, false});
  EXPECT_EQ(s.accumulated_text, "called for chest pain 58 year old");
  EXPECT_EQ(s.segments_seen, 3u);
  EXPECT_EQ(s.extracted_age, 58);
  EXPECT_THROW(accumulate(s, {2, "again", "t", 0, false}), DuplicateSegment);
}

TEST(BuiltinPredictor, RefinesByExtractedAge) {
  const auto& kb = testing::reference_kb();
  BuiltinPredictor predictor(kb);
  IncidentState s = accumulate({}, {0, "9 year old having a seizure, convulsions", "t", 0, false});
  const auto p = predictor.predict(s, 0);
  EXPECT_EQ(p.top()->protocol_id, "medical-seizure (pediatric protocol 9-12)");
}

TEST(AdapterPredictor, RefinesGroupIdsFromEngine) {
  testing::TempDir tmp;
  testing::write_file(tmp / "resp.json",
                      R"({"ranking":[{"protocol_id":"group: seizure","confidence":0.9},{"protocol_id":"cardiac","confidence":0.2}]})");
  const auto kb = KnowledgeBase::from_json(toy_kb());
  AdapterPredictor predictor(kb, open_line_channel(testing::fake_adapter("protocol", "--response " + (tmp / "resp.json").string())),
                             std::chrono::milliseconds(3000));
  IncidentState s;
  s.extracted_age = 5;
  const auto p = predictor.predict(s, 4);
  ASSERT_EQ(p.entries.size(), 2u);
  EXPECT_EQ(p.entries[0].protocol_id, "seizure pediatric");
  EXPECT_DOUBLE_EQ(p.entries[0].confidence, 0.9);
  EXPECT_FALSE(p.timed_out);
}

TEST(AdapterPredictor, UnknownIdIsAnError) {
  testing::TempDir tmp;
  testing::write_file(tmp / "resp.json", R"({"ranking":[{"protocol_id":"nope","confidence":0.9}]})");
  const auto kb = KnowledgeBase::from_json(toy_kb());
  AdapterPredictor predictor(kb, open_line_channel(testing::fake_adapter("protocol", "--response " + (tmp / "resp.json").string())),
                             std::chrono::milliseconds(3000));
  EXPECT_THROW(predictor.predict({}, 0), AdapterError);
}

TEST(AdapterPredictor, TimeoutFallsBackToLowInformation) {
  const auto kb = KnowledgeBase::from_json(toy_kb());
  AdapterPredictor predictor(kb, open_line_channel(testing::fake_adapter("protocol", "--delay-ms 400")),
                             std::chrono::milliseconds(30));
  const auto p = predictor.predict({}, 1);
  EXPECT_TRUE(p.timed_out);
  EXPECT_TRUE(p.low_information);
  EXPECT_EQ(p.entries.size(), 3u);
}

}  // namespace
}  // namespace emsrt::protocol
