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

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "emsrt/audio/transcriber.hpp"
#include "emsrt/audio/window.hpp"
#include "emsrt/protocol/predictor.hpp"
#include "emsrt/runtime/artifacts.hpp"
#include "emsrt/runtime/feedback_queue.hpp"
#include "emsrt/runtime/slo.hpp"
#include "emsrt/vision/intervention.hpp"
#include "emsrt/wire/gateway.hpp"

namespace emsrt::runtime {

struct PipelineConfig {
  std::uint32_t window_samples = audio::kDefaultWindowSamples;
  double gate_threshold = vision::kDefaultGateThreshold;
  std::int64_t slo_target_us = kDefaultSloTargetUs;
  /// Emit the zero-padded trailing partial window at end of stream.
  bool flush_partial_window = false;
  /// How long the vision stage waits for a window's frames to arrive.
  std::chrono::milliseconds frame_wait{250};
  std::size_t stage_queue_capacity = 16;
  std::size_t frame_buffer_capacity = 256;
  std::filesystem::path run_dir;
};

struct PipelineStages {
  std::unique_ptr<audio::Transcriber> transcriber;
  std::unique_ptr<protocol::ProtocolPredictor> predictor;
  std::unique_ptr<vision::FrameClassifier> classifier;  // null disables the vision stage
};

/// Called by the feedback worker with each encoded frame, in dispatch order.
using FeedbackSink = std::function<void(const std::vector<std::uint8_t>& frame, const wire::FeedbackMessage& msg)>;

/// Deterministic counters written to summary.json.
struct RunSummary {
  std::uint64_t windows = 0;
  std::uint64_t protocol_feedbacks = 0;
  std::uint64_t intervention_feedbacks = 0;
  std::uint64_t gated_open_windows = 0;
  std::uint64_t vision_disabled_windows = 0;
  std::uint64_t classifier_calls = 0;
  std::uint64_t intervention_predictions = 0;
  std::uint64_t skipped_frames = 0;
  std::uint64_t frames_received = 0;
  std::uint64_t frames_outside_windows = 0;
  std::uint64_t frames_evicted = 0;
  std::uint64_t asr_timeouts = 0;
  std::uint64_t late_audio_packets = 0;
  std::uint64_t gap_samples = 0;
};

nlohmann::json summary_to_json(const RunSummary& s);

struct RunResult {
  RunSummary summary;
  std::vector<LatencyTrace> traces;  // ascending window id
  SloReport slo;
  std::vector<protocol::RankedPrediction> predictions;
  std::vector<vision::InterventionPrediction> interventions;
  std::vector<audio::TranscriptSegment> transcripts;
  std::int64_t clock_offset_us = 0;  // monotonic now_us() minus capture ts at the first packet
  std::string error;                 // first stage failure, empty on success

  bool ok() const { return error.empty(); }
};

/// The concurrent stage graph: chunker -> ASR -> protocol -> {feedback, vision
/// -> feedback}. One worker thread per stage, bounded blocking queues between
/// them, a drop-oldest queue for frames and a priority queue for feedback.
///
/// The pipeline consumes the audio and frame queues until the audio queue is
/// closed and drained; it then drains every stage in order. A stage that
/// throws stops processing, the rest drain, and wait() reports the error after
/// all artifacts are flushed.
class Pipeline {
 public:
  Pipeline(PipelineConfig config, const protocol::KnowledgeBase& kb, PipelineStages stages,
           std::shared_ptr<wire::AudioQueue> audio, std::shared_ptr<wire::FrameQueue> frames, FeedbackSink sink);
  ~Pipeline();

  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  void start();

  /// Joins every worker and writes slo.json and summary.json.
  RunResult wait();

  /// Extra key/value pairs merged into run_info.json.
  void set_run_info(nlohmann::json info) { run_info_ = std::move(info); }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  nlohmann::json run_info_ = nlohmann::json::object();
};

}  // namespace emsrt::runtime
