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

#include "emsrt/vision/intervention.hpp"

#include <algorithm>
#include <cmath>

#include "emsrt/common/base64.hpp"
#include "emsrt/common/clock.hpp"
#include "emsrt/common/error.hpp"
#include "emsrt/common/rng.hpp"

namespace emsrt::vision {

bool gate(const protocol::RankedPrediction& prediction, double threshold) {
  const auto* top = prediction.top();
  return top && top->confidence >= threshold;
}

CandidateSet candidate_interventions(const protocol::KnowledgeBase& kb, const std::string& protocol_id) {
  const auto* node = kb.find(protocol_id);
  if (!node || node->kind != protocol::NodeKind::Protocol) throw UnknownProtocol(protocol_id);
  auto it = kb.interventions().find(protocol_id);
  if (!node->vision_enabled || it == kb.interventions().end() || it->second.empty())
    throw EmptyCandidates(protocol_id);
  return {protocol_id, it->second};
}

std::optional<std::string> InterventionTimeline::label_at(std::uint64_t capture_ts_us) const {
  for (const auto& iv : intervals_) {
    if (static_cast<std::int64_t>(capture_ts_us) >= std::llround(iv.start_s * 1e6) &&
        static_cast<std::int64_t>(capture_ts_us) < std::llround(iv.end_s * 1e6))
      return iv.label;
  }
  return std::nullopt;
}

OracleClassifier::OracleClassifier(InterventionTimeline truth, Options options)
    : truth_(std::move(truth)), options_(std::move(options)) {
  if (!(options_.epsilon >= 0.0 && options_.epsilon <= 1.0))
    throw ConfigError("epsilon", "must be within [0, 1]");
  if (options_.model == ConfusionModel::VocabularyUniform && options_.vocabulary.size() < 2)
    throw ConfigError("vocabulary", "vocabulary-uniform confusion needs at least two labels");
}

std::string OracleClassifier::pick(std::uint32_t frame_id, const std::optional<std::string>& truth,
                                   const std::vector<std::string>& candidates) const {
  Rng rng(splitmix64(options_.seed ^ splitmix64(frame_id)));
  const bool confused = rng.uniform() < options_.epsilon;
  const bool known = truth && std::find(candidates.begin(), candidates.end(), *truth) != candidates.end();
  if (!known) return candidates[rng.below(candidates.size())];
  if (!confused) return *truth;

  if (options_.model == ConfusionModel::CandidateUniform) {
    if (candidates.size() == 1) return *truth;
    auto idx = rng.below(candidates.size() - 1);
    for (const auto& c : candidates) {
      if (c == *truth) continue;
      if (idx-- == 0) return c;
    }
    return *truth;
  }
  std::vector<const std::string*> distractors;
  for (const auto& v : options_.vocabulary)
    if (v != *truth) distractors.push_back(&v);
  const std::string& d = *distractors[rng.below(distractors.size())];
  return std::find(candidates.begin(), candidates.end(), d) != candidates.end() ? d : *truth;
}

std::optional<InterventionPrediction> OracleClassifier::classify(const wire::VideoFrame& frame,
                                                                 const CandidateSet& candidates) {
  if (candidates.labels.empty()) throw EmptyCandidates(candidates.protocol_id);
  ++calls_;
  InterventionPrediction p;
  p.frame_id = frame.frame_id;
  p.capture_ts_us = frame.capture_ts_us;
  p.label = pick(frame.frame_id, truth_.label_at(frame.capture_ts_us), candidates.labels);
  p.score = 1.0 - options_.epsilon;
  p.produced_ts_us = now_us();
  return p;
}

AdapterClassifier::AdapterClassifier(std::unique_ptr<LineChannel> channel, std::chrono::milliseconds timeout)
    : client_(std::move(channel)), timeout_(timeout) {}

std::optional<InterventionPrediction> AdapterClassifier::classify(const wire::VideoFrame& frame,
                                                                  const CandidateSet& candidates) {
  if (candidates.labels.empty()) throw EmptyCandidates(candidates.protocol_id);
  ++calls_;
  const nlohmann::json request = {{"v", kAdapterProtocolVersion},
                                  {"frame_id", frame.frame_id},
                                  {"image_b64", base64_encode(frame.bytes)},
                                  {"labels", candidates.labels}};
  auto response = client_.call(request, "frame_id", timeout_);
  if (!response) {
    ++skipped_;
    return std::nullopt;
  }
  InterventionPrediction p;
  p.frame_id = frame.frame_id;
  p.capture_ts_us = frame.capture_ts_us;
  p.label = response->value("label", std::string{});
  p.score = response->value("score", -1.0);
  if (std::find(candidates.labels.begin(), candidates.labels.end(), p.label) == candidates.labels.end())
    throw AdapterError("vision adapter returned non-candidate label '" + p.label + "'");
  if (!(p.score >= 0.0 && p.score <= 1.0)) throw AdapterError("vision adapter returned score outside [0,1]");
  p.produced_ts_us = now_us();
  return p;
}

WindowOutcome process_window(const std::vector<wire::VideoFrame>& frames, const protocol::RankedPrediction& prediction,
                             const protocol::KnowledgeBase& kb, double threshold, FrameClassifier& classifier) {
  WindowOutcome out;
  if (!gate(prediction, threshold)) {
    out.skip_reason = "gate_closed";
    return out;
  }
  out.gated_open = true;
  out.protocol_id = prediction.top()->protocol_id;
  CandidateSet candidates;
  try {
    candidates = candidate_interventions(kb, out.protocol_id);
  } catch (const EmptyCandidates&) {
    out.skip_reason = "vision_disabled";
    return out;
  }
  if (frames.empty()) out.skip_reason = "no_frames";
  for (const auto& f : frames) {
    ++out.classifier_calls;
    auto p = classifier.classify(f, candidates);
    if (!p) {
      ++out.skipped_frames;
      continue;
    }
    p->window_id = prediction.window_id;
    out.predictions.push_back(std::move(*p));
  }
  return out;
}

}  // namespace emsrt::vision
