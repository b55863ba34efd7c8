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

#include "emsrt/protocol/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "emsrt/audio/normalize.hpp"
#include "emsrt/common/clock.hpp"

namespace emsrt::protocol {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void sort_entries(std::vector<RankedEntry>& entries) {
  std::sort(entries.begin(), entries.end(), [](const RankedEntry& a, const RankedEntry& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    return a.protocol_id < b.protocol_id;
  });
}

LexicalScorer::LexicalScorer(const KnowledgeBase& kb, ScorerConfig config) : config_(config) {
  std::vector<std::vector<std::string>> unit_nodes;
  for (const auto& g : kb.groups()) {
    auto ev = kb.evidence_of(g.adult_protocol_id);
    for (const auto& n : kb.evidence_of(g.pediatric_protocol_id))
      if (std::find(ev.begin(), ev.end(), n) == ev.end()) ev.push_back(n);
    unit_ids_.push_back(g.group_id);
    unit_nodes.push_back(std::move(ev));
  }
  for (const auto& pid : kb.protocol_ids()) {
    if (kb.group_of(pid)) continue;
    unit_ids_.push_back(pid);
    unit_nodes.push_back(kb.evidence_of(pid));
  }

  std::unordered_map<std::string, std::size_t> slot;
  std::vector<std::size_t> df;
  for (const auto& nodes : unit_nodes) {
    std::vector<std::size_t> refs;
    for (const auto& id : nodes) {
      auto [it, inserted] = slot.emplace(id, evidence_.size());
      if (inserted) {
        const Node* node = kb.find(id);
        Evidence e{id, {}, 0};
        std::set<std::string> forms;
        for (const auto& t : node->terms) forms.insert(audio::normalize_text(t, audio::NormalizationProfile::Standard));
        forms.insert(audio::normalize_text(node->name, audio::NormalizationProfile::Standard));
        for (const auto& f : forms)
          if (!f.empty()) e.phrases.push_back(" " + f + " ");
        evidence_.push_back(std::move(e));
        df.push_back(0);
      }
      ++df[it->second];
      refs.push_back(it->second);
    }
    unit_evidence_.push_back(std::move(refs));
  }
  const double units = static_cast<double>(unit_ids_.size());
  for (std::size_t i = 0; i < evidence_.size(); ++i)
    evidence_[i].idf = std::log(1.0 + units / static_cast<double>(df[i]));
}

double LexicalScorer::idf(const std::string& node_id) const {
  for (const auto& e : evidence_)
    if (e.node_id == node_id) return e.idf;
  return 0.0;
}

std::vector<std::pair<std::string, double>> LexicalScorer::raw_scores(const std::string& accumulated_text) const {
  const std::string text =
      " " + audio::normalize_text(accumulated_text, audio::NormalizationProfile::Standard) + " ";
  std::vector<char> present(evidence_.size(), 0);
  for (std::size_t i = 0; i < evidence_.size(); ++i) {
    for (const auto& phrase : evidence_[i].phrases) {
      if (text.find(phrase) != std::string::npos) {
        present[i] = 1;
        break;
      }
    }
  }
  std::vector<std::pair<std::string, double>> out;
  out.reserve(unit_ids_.size());
  for (std::size_t u = 0; u < unit_ids_.size(); ++u) {
    double score = 0;
    for (std::size_t e : unit_evidence_[u])
      if (present[e]) score += evidence_[e].idf;
    out.emplace_back(unit_ids_[u], score);
  }
  return out;
}

RankedPrediction LexicalScorer::predict(const std::string& accumulated_text, std::uint32_t window_id) const {
  const auto raw = raw_scores(accumulated_text);
  double lo = 0, hi = 0;
  if (!raw.empty()) {
    lo = hi = raw.front().second;
    for (const auto& [_, s] : raw) {
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
  }
  RankedPrediction out;
  out.window_id = window_id;
  out.low_information = hi <= 0.0;
  for (const auto& [id, s] : raw) {
    const double scaled = hi > lo ? (s - lo) / (hi - lo) : 0.0;
    out.entries.push_back({id, sigmoid(config_.slope * (scaled - config_.offset)), s});
  }
  sort_entries(out.entries);
  out.produced_ts_us = now_us();
  return out;
}

RankedPrediction refine(RankedPrediction prediction, const IncidentState& state, const KnowledgeBase& kb) {
  const bool pediatric = state.extracted_age && *state.extracted_age <= kPediatricMaxAge;
  for (auto& e : prediction.entries) {
    if (const ProtocolGroup* g = kb.group_by_id(e.protocol_id))
      e.protocol_id = pediatric ? g->pediatric_protocol_id : g->adult_protocol_id;
  }
  sort_entries(prediction.entries);
  return prediction;
}

}  // namespace emsrt::protocol
