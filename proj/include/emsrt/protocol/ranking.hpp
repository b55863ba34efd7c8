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
#include <string>
#include <vector>

#include "emsrt/protocol/incident.hpp"
#include "emsrt/protocol/knowledge_base.hpp"

namespace emsrt::protocol {

struct RankedEntry {
  std::string protocol_id;  // a group id before refine()
  double confidence = 0;
  double raw_score = 0;

  friend bool operator==(const RankedEntry&, const RankedEntry&) = default;
};

struct RankedPrediction {
  std::uint32_t window_id = 0;
  std::vector<RankedEntry> entries;  // descending confidence, then ascending id
  std::int64_t produced_ts_us = 0;
  bool low_information = false;
  bool timed_out = false;

  const RankedEntry* top() const { return entries.empty() ? nullptr : &entries.front(); }
};

/// confidence = sigmoid(slope * (scaled - offset)), scaled = min-max scaled raw score.
struct ScorerConfig {
  double slope = 4.0;
  double offset = 0.5;
};

double sigmoid(double x);

/// Sorts descending by confidence, ties by ascending protocol id.
void sort_entries(std::vector<RankedEntry>& entries);

/// Idf-weighted lexical matcher over the KB's symptom, medication and
/// procedure terms. Each group and each ungrouped protocol is one ranked unit;
/// a group's evidence is the union of its members' evidence.
///
///   raw(u)  = sum over evidence n of u with a term present in the text: idf(n)
///   idf(n)  = ln(1 + U / df(n)),  df(n) = number of units linked to n
///
/// Terms and text are normalized with the Standard profile; a term matches as
/// a whole-word contiguous phrase.
class LexicalScorer {
 public:
  LexicalScorer(const KnowledgeBase& kb, ScorerConfig config = {});

  /// Coarse ranking over units. Sets low_information when no term matched.
  RankedPrediction predict(const std::string& accumulated_text, std::uint32_t window_id) const;

  /// Raw scores by unit id, in unit order.
  std::vector<std::pair<std::string, double>> raw_scores(const std::string& accumulated_text) const;

  double idf(const std::string& node_id) const;
  const std::vector<std::string>& unit_ids() const { return unit_ids_; }
  const ScorerConfig& config() const { return config_; }

 private:
  struct Evidence {
    std::string node_id;
    std::vector<std::string> phrases;  // " term " padded
    double idf = 0;
  };

  ScorerConfig config_;
  std::vector<std::string> unit_ids_;
  std::vector<std::vector<std::size_t>> unit_evidence_;
  std::vector<Evidence> evidence_;
};

/// Fine ranking: each group entry becomes its pediatric member when
/// age <= 18, otherwise (including unknown age) its adult member.
/// Confidences are carried over unchanged; the result is re-sorted.
RankedPrediction refine(RankedPrediction prediction, const IncidentState& state, const KnowledgeBase& kb);

}  // namespace emsrt::protocol
