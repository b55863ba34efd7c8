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

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "emsrt/common/line_channel.hpp"
#include "emsrt/protocol/knowledge_base.hpp"
#include "emsrt/protocol/ranking.hpp"
#include "emsrt/wire/packets.hpp"

namespace emsrt::vision {

inline constexpr double kDefaultGateThreshold = 0.5;

struct CandidateSet {
  std::string protocol_id;
  std::vector<std::string> labels;
};

struct InterventionPrediction {
  std::uint32_t frame_id = 0;
  std::uint64_t capture_ts_us = 0;
  std::string label;
  double score = 0;
  std::uint32_t window_id = 0;
  std::int64_t produced_ts_us = 0;
};

/// True iff the top confidence is at least `threshold`; false for an empty ranking.
bool gate(const protocol::RankedPrediction& prediction, double threshold);

/// The KB's intervention list for the protocol, order preserved.
/// Throws UnknownProtocol, or EmptyCandidates for a vision-disabled protocol.
CandidateSet candidate_interventions(const protocol::KnowledgeBase& kb, const std::string& protocol_id);

/// Ground-truth intervention intervals in capture time.
struct TimedLabel {
  double start_s = 0;
  double end_s = 0;
  std::string label;
};

class InterventionTimeline {
 public:
  InterventionTimeline() = default;
  explicit InterventionTimeline(std::vector<TimedLabel> intervals) : intervals_(std::move(intervals)) {}

  /// Label whose [start, end) contains the instant; the first listed wins.
  std::optional<std::string> label_at(std::uint64_t capture_ts_us) const;
  bool empty() const { return intervals_.empty(); }

 private:
  std::vector<TimedLabel> intervals_;
};

/// Vision stage contract. nullopt means the frame was skipped.
class FrameClassifier {
 public:
  virtual ~FrameClassifier() = default;
  virtual std::optional<InterventionPrediction> classify(const wire::VideoFrame& frame,
                                                         const CandidateSet& candidates) = 0;
  virtual std::string id() const = 0;

  std::uint64_t calls() const { return calls_; }
  std::uint64_t skipped() const { return skipped_; }

 protected:
  std::uint64_t calls_ = 0;
  std::uint64_t skipped_ = 0;
};

/// How the oracle picks its wrong answer on a confused frame.
enum class ConfusionModel {
  /// Uniform over the candidates other than the truth.
  CandidateUniform,
  /// Uniform over the whole vocabulary other than the truth; a distractor
  /// outside the candidate set cannot be emitted, so the truth is returned.
  /// Accuracy with k candidates out of V labels: 1 - eps * (k-1) / (V-1).
  VocabularyUniform,
};

/// Noisy ground-truth classifier. Each frame draws from its own stream seeded
/// by (seed, frame_id), so results are independent of call order. The score is
/// 1 - epsilon. When the truth is unknown or not a candidate, the label is
/// uniform over the candidates.
class OracleClassifier final : public FrameClassifier {
 public:
  struct Options {
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    ConfusionModel model = ConfusionModel::CandidateUniform;
    std::vector<std::string> vocabulary;  // required for VocabularyUniform
  };

  OracleClassifier(InterventionTimeline truth, Options options);

  std::optional<InterventionPrediction> classify(const wire::VideoFrame& frame,
                                                 const CandidateSet& candidates) override;
  std::string id() const override { return "oracle"; }

  /// Classification against an explicit truth label; the core of classify().
  std::string pick(std::uint32_t frame_id, const std::optional<std::string>& truth,
                   const std::vector<std::string>& candidates) const;

 private:
  InterventionTimeline truth_;
  Options options_;
};

/// External zero-shot model over the line protocol:
///
///   request   {"v":1,"frame_id":N,"image_b64":"...","labels":[...]}
///   response  {"frame_id":N,"label":"...","score":s}
///
/// A timed-out frame is skipped and counted.
class AdapterClassifier final : public FrameClassifier {
 public:
  AdapterClassifier(std::unique_ptr<LineChannel> channel, std::chrono::milliseconds timeout);
  std::optional<InterventionPrediction> classify(const wire::VideoFrame& frame,
                                                 const CandidateSet& candidates) override;
  std::string id() const override { return "adapter"; }

 private:
  JsonAdapterClient client_;
  std::chrono::milliseconds timeout_;
};

struct WindowOutcome {
  bool gated_open = false;
  std::string protocol_id;  // top protocol when gated open
  std::string skip_reason;  // "gate_closed", "vision_disabled", "no_frames" or empty
  std::vector<InterventionPrediction> predictions;
  std::uint64_t classifier_calls = 0;
  std::uint64_t skipped_frames = 0;
};

/// Gates, derives candidates for the top protocol and classifies each frame.
/// No classifier call happens unless the gate is open and the protocol is vision-enabled.
WindowOutcome process_window(const std::vector<wire::VideoFrame>& frames, const protocol::RankedPrediction& prediction,
                             const protocol::KnowledgeBase& kb, double threshold, FrameClassifier& classifier);

}  // namespace emsrt::vision
