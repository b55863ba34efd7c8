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

#include "emsrt/runtime/pipeline.hpp"

#include <deque>
#include <limits>
#include <map>

#include "emsrt/common/clock.hpp"
#include "emsrt/common/error.hpp"
#include "emsrt/common/queues.hpp"
#include "emsrt/protocol/incident.hpp"

namespace emsrt::runtime {
namespace {

struct WindowJob {
  audio::AudioWindow window;
};

struct TranscriptJob {
  audio::TranscriptSegment segment;
  std::uint64_t start_ts_us = 0;
  std::uint64_t end_ts_us = 0;
};

struct VisionJob {
  protocol::RankedPrediction prediction;
  std::uint64_t start_ts_us = 0;
  std::uint64_t end_ts_us = 0;
};

/// Per-window traces. A trace is persisted once every feedback message and
/// vision job it is waiting on has finished.
class TraceBook {
 public:
  explicit TraceBook(ArtifactWriter& writer) : writer_(writer) {}

  void open(std::uint32_t window_id, std::int64_t t_window_ready) {
    std::lock_guard lock(mu_);
    auto& e = entries_[window_id];
    e.trace.window_id = window_id;
    e.trace.t_window_ready = t_window_ready;
    e.pending = 1;
  }

  void set(std::uint32_t window_id, TimestampUs LatencyTrace::*field, std::int64_t value) {
    std::lock_guard lock(mu_);
    entries_[window_id].trace.*field = value;
  }

  void add_pending(std::uint32_t window_id) {
    std::lock_guard lock(mu_);
    ++entries_[window_id].pending;
  }

  LatencyTrace snapshot(std::uint32_t window_id) {
    std::lock_guard lock(mu_);
    return entries_[window_id].trace;
  }

  void complete(std::uint32_t window_id) {
    std::lock_guard lock(mu_);
    auto& e = entries_[window_id];
    if (--e.pending == 0 && !e.written) {
      e.written = true;
      writer_.trace(e.trace);
    }
  }

  /// Persists anything still pending and returns all traces by window id.
  std::vector<LatencyTrace> finish() {
    std::lock_guard lock(mu_);
    std::vector<LatencyTrace> out;
    for (auto& [_, e] : entries_) {
      if (!e.written) {
        e.written = true;
        writer_.trace(e.trace);
      }
      out.push_back(e.trace);
    }
    return out;
  }

 private:
  struct Entry {
    LatencyTrace trace;
    int pending = 0;
    bool written = false;
  };

  ArtifactWriter& writer_;
  std::mutex mu_;
  std::map<std::uint32_t, Entry> entries_;
};

wire::FeedbackMessage majority_feedback(const std::vector<vision::InterventionPrediction>& predictions,
                                        std::uint32_t window_id) {
  std::map<std::string, std::size_t> votes;
  for (const auto& p : predictions) ++votes[p.label];
  auto best = votes.begin();
  for (auto it = votes.begin(); it != votes.end(); ++it)
    if (it->second > best->second) best = it;
  wire::FeedbackMessage msg;
  msg.kind = wire::FeedbackKind::Intervention;
  msg.window_id = window_id;
  msg.label = best->first;
  msg.confidence = static_cast<double>(best->second) / static_cast<double>(predictions.size());
  return msg;
}

}  // namespace

nlohmann::json summary_to_json(const RunSummary& s) {
  return {{"windows", s.windows},
          {"protocol_feedbacks", s.protocol_feedbacks},
          {"intervention_feedbacks", s.intervention_feedbacks},
          {"gated_open_windows", s.gated_open_windows},
          {"vision_disabled_windows", s.vision_disabled_windows},
          {"classifier_calls", s.classifier_calls},
          {"intervention_predictions", s.intervention_predictions},
          {"skipped_frames", s.skipped_frames},
          {"frames_received", s.frames_received},
          {"frames_outside_windows", s.frames_outside_windows},
          {"frames_evicted", s.frames_evicted},
          {"asr_timeouts", s.asr_timeouts},
          {"late_audio_packets", s.late_audio_packets},
          {"gap_samples", s.gap_samples}};
}

struct Pipeline::Impl {
  Impl(PipelineConfig cfg, const protocol::KnowledgeBase& kb_ref, PipelineStages st,
       std::shared_ptr<wire::AudioQueue> a, std::shared_ptr<wire::FrameQueue> f, FeedbackSink s)
      : config(std::move(cfg)),
        kb(kb_ref),
        stages(std::move(st)),
        audio(std::move(a)),
        frames(std::move(f)),
        sink(std::move(s)),
        writer(config.run_dir),
        traces(writer),
        window_q(config.stage_queue_capacity),
        transcript_q(config.stage_queue_capacity),
        vision_q(std::numeric_limits<std::size_t>::max()),
        feedback_producers(stages.classifier ? 2 : 1) {}

  void fail(const std::string& stage, const std::string& what) {
    std::lock_guard lock(mu);
    if (error.empty()) error = stage + ": " + what;
  }

  void producer_done() {
    if (--feedback_producers == 0) feedback_q.close();
  }

  void chunker();
  void asr();
  void protocol_stage();
  void vision_stage();
  void feedback_sender();

  PipelineConfig config;
  const protocol::KnowledgeBase& kb;
  PipelineStages stages;
  std::shared_ptr<wire::AudioQueue> audio;
  std::shared_ptr<wire::FrameQueue> frames;
  FeedbackSink sink;
  ArtifactWriter writer;
  TraceBook traces;

  BoundedQueue<WindowJob> window_q;
  BoundedQueue<TranscriptJob> transcript_q;
  BoundedQueue<VisionJob> vision_q;
  FeedbackQueue feedback_q;
  std::atomic<int> feedback_producers;

  std::mutex mu;
  std::string error;
  RunSummary summary;
  std::vector<protocol::RankedPrediction> predictions;
  std::vector<vision::InterventionPrediction> interventions;
  std::vector<audio::TranscriptSegment> transcripts;
  std::optional<std::int64_t> clock_offset_us;

  std::vector<std::thread> threads;
  bool started = false;
};

void Pipeline::Impl::chunker() {
  try {
    audio::WindowAccumulator acc(config.window_samples);
    auto emit = [&](audio::AudioWindow&& w) {
      traces.open(w.window_id, now_us());
      {
        std::lock_guard lock(mu);
        ++summary.windows;
      }
      window_q.push({std::move(w)});
    };
    while (auto packet = audio->pop()) {
      if (!clock_offset_us) {
        std::lock_guard lock(mu);
        clock_offset_us = now_us() - static_cast<std::int64_t>(packet->capture_ts_us);
      }
      for (auto& w : acc.push(*packet)) emit(std::move(w));
    }
    if (config.flush_partial_window)
      if (auto w = acc.flush()) emit(std::move(*w));
    std::lock_guard lock(mu);
    summary.late_audio_packets = acc.late_packets();
    summary.gap_samples = acc.total_gap_samples();
  } catch (const std::exception& e) {
    fail("chunker", e.what());
    while (audio->pop()) {
    }
  }
  window_q.close();
}

void Pipeline::Impl::asr() {
  try {
    while (auto job = window_q.pop()) {
      const auto id = job->window.window_id;
      traces.set(id, &LatencyTrace::t_asr_start, now_us());
      auto segment = stages.transcriber->transcribe(job->window);
      segment.window_id = id;
      traces.set(id, &LatencyTrace::t_asr_done, now_us());
      writer.transcript(segment);
      {
        std::lock_guard lock(mu);
        transcripts.push_back(segment);
        if (segment.timed_out) ++summary.asr_timeouts;
      }
      transcript_q.push({std::move(segment), job->window.start_ts_us, job->window.end_ts_us});
    }
  } catch (const std::exception& e) {
    fail("asr", e.what());
    while (window_q.pop()) {
    }
  }
  transcript_q.close();
}

void Pipeline::Impl::protocol_stage() {
  try {
    protocol::IncidentState state;
    while (auto job = transcript_q.pop()) {
      const auto id = job->segment.window_id;
      traces.set(id, &LatencyTrace::t_protocol_start, now_us());
      state = protocol::accumulate(std::move(state), job->segment);
      auto prediction = stages.predictor->predict(state, id);
      prediction.window_id = id;
      traces.set(id, &LatencyTrace::t_protocol_done, now_us());
      writer.prediction(prediction);

      wire::FeedbackMessage msg;
      msg.kind = wire::FeedbackKind::Protocol;
      msg.window_id = id;
      if (const auto* top = prediction.top()) {
        msg.label = top->protocol_id;
        msg.confidence = top->confidence;
      }
      if (stages.classifier) traces.add_pending(id);
      const auto enqueued = now_us();
      traces.set(id, &LatencyTrace::t_feedback_enqueued, enqueued);
      msg.emitted_ts_us = static_cast<std::uint64_t>(enqueued);
      feedback_q.submit(std::move(msg));
      if (stages.classifier) vision_q.push({prediction, job->start_ts_us, job->end_ts_us});
      std::lock_guard lock(mu);
      predictions.push_back(std::move(prediction));
    }
  } catch (const std::exception& e) {
    fail("protocol", e.what());
    while (transcript_q.pop()) {
    }
  }
  vision_q.close();
  producer_done();
}

void Pipeline::Impl::vision_stage() {
  std::deque<wire::VideoFrame> buffer;
  std::optional<std::uint64_t> watermark;
  auto add = [&](wire::VideoFrame&& f) {
    watermark = watermark ? std::max(*watermark, f.capture_ts_us) : f.capture_ts_us;
    std::lock_guard lock(mu);
    ++summary.frames_received;
    if (buffer.size() >= config.frame_buffer_capacity) {
      buffer.pop_front();
      ++summary.frames_evicted;
    }
    buffer.push_back(std::move(f));
  };
  auto drain_ready = [&] {
    while (auto f = frames->pop_for(std::chrono::milliseconds(0))) add(std::move(*f));
  };

  try {
    while (true) {
      auto job = vision_q.pop_for(std::chrono::milliseconds(20));
      drain_ready();
      if (!job) {
        if (vision_q.exhausted()) break;
        continue;
      }
      const auto id = job->prediction.window_id;
      traces.set(id, &LatencyTrace::t_vision_start, now_us());

      const auto* top = job->prediction.top();
      const auto* node = top ? kb.find(top->protocol_id) : nullptr;
      const bool wants_frames = vision::gate(job->prediction, config.gate_threshold) && node && node->vision_enabled;
      if (wants_frames) {
        const auto deadline = Clock::now() + config.frame_wait;
        while (!(watermark && *watermark >= job->end_ts_us) && !frames->exhausted() && Clock::now() < deadline) {
          if (auto f = frames->pop_for(std::chrono::milliseconds(5))) add(std::move(*f));
        }
      }

      std::vector<wire::VideoFrame> window_frames;
      std::uint64_t outside = 0;
      while (!buffer.empty() && buffer.front().capture_ts_us < job->end_ts_us) {
        if (buffer.front().capture_ts_us >= job->start_ts_us) window_frames.push_back(std::move(buffer.front()));
        else ++outside;
        buffer.pop_front();
      }

      auto outcome = vision::process_window(window_frames, job->prediction, kb, config.gate_threshold,
                                            *stages.classifier);
      traces.set(id, &LatencyTrace::t_vision_done, now_us());
      writer.interventions(outcome.protocol_id, outcome.predictions);
      {
        std::lock_guard lock(mu);
        summary.frames_outside_windows += outside;
        if (outcome.gated_open) ++summary.gated_open_windows;
        if (outcome.skip_reason == "vision_disabled") ++summary.vision_disabled_windows;
        summary.classifier_calls += outcome.classifier_calls;
        summary.skipped_frames += outcome.skipped_frames;
        summary.intervention_predictions += outcome.predictions.size();
        interventions.insert(interventions.end(), outcome.predictions.begin(), outcome.predictions.end());
      }
      if (outcome.predictions.empty()) {
        traces.complete(id);
        continue;
      }
      auto msg = majority_feedback(outcome.predictions, id);
      msg.emitted_ts_us = static_cast<std::uint64_t>(now_us());
      feedback_q.submit(std::move(msg));
    }
  } catch (const std::exception& e) {
    fail("vision", e.what());
    while (auto job = vision_q.pop()) traces.complete(job->prediction.window_id);
  }
  drain_ready();
  {
    std::lock_guard lock(mu);
    summary.frames_outside_windows += buffer.size();
  }
  producer_done();
}

void Pipeline::Impl::feedback_sender() {
  bool broken = false;
  while (auto msg = feedback_q.pop()) {
    const auto id = msg->window_id;
    if (broken) {
      traces.complete(id);
      continue;
    }
    try {
      const bool is_protocol = msg->kind == wire::FeedbackKind::Protocol;
      if (is_protocol) traces.set(id, &LatencyTrace::t_feedback_dequeued, now_us());
      msg->trace = traces.snapshot(id);
      const auto frame = wire::encode_feedback(*msg);
      if (sink) sink(frame, *msg);
      const auto sent = now_us();
      traces.set(id, is_protocol ? &LatencyTrace::t_feedback_sent : &LatencyTrace::t_intervention_sent, sent);
      writer.feedback(*msg, sent);
      {
        std::lock_guard lock(mu);
        ++(is_protocol ? summary.protocol_feedbacks : summary.intervention_feedbacks);
      }
    } catch (const std::exception& e) {
      fail("feedback", e.what());
      broken = true;
    }
    traces.complete(id);
  }
}

Pipeline::Pipeline(PipelineConfig config, const protocol::KnowledgeBase& kb, PipelineStages stages,
                   std::shared_ptr<wire::AudioQueue> audio, std::shared_ptr<wire::FrameQueue> frames,
                   FeedbackSink sink) {
  if (config.window_samples == 0) throw ConfigError("window_samples", "must be positive");
  if (!(config.gate_threshold >= 0.0 && config.gate_threshold <= 1.0))
    throw ConfigError("gate_threshold", "must be within [0, 1]");
  if (!stages.transcriber) throw ConfigError("asr", "no transcriber configured");
  if (!stages.predictor) throw ConfigError("protocol", "no protocol predictor configured");
  impl_ = std::make_unique<Impl>(std::move(config), kb, std::move(stages), std::move(audio), std::move(frames),
                                 std::move(sink));
}

Pipeline::~Pipeline() {
  if (impl_ && impl_->started) {
    impl_->audio->close();
    for (auto& t : impl_->threads)
      if (t.joinable()) t.join();
  }
}

void Pipeline::start() {
  if (impl_->started) return;
  impl_->started = true;
  auto* p = impl_.get();
  p->threads.emplace_back([p] { p->chunker(); });
  p->threads.emplace_back([p] { p->asr(); });
  p->threads.emplace_back([p] { p->protocol_stage(); });
  if (p->stages.classifier) p->threads.emplace_back([p] { p->vision_stage(); });
  p->threads.emplace_back([p] { p->feedback_sender(); });
}

RunResult Pipeline::wait() {
  auto* p = impl_.get();
  for (auto& t : p->threads)
    if (t.joinable()) t.join();

  RunResult result;
  result.traces = p->traces.finish();
  {
    std::lock_guard lock(p->mu);
    result.summary = p->summary;
    result.predictions = std::move(p->predictions);
    result.interventions = std::move(p->interventions);
    result.transcripts = std::move(p->transcripts);
    result.clock_offset_us = p->clock_offset_us.value_or(0);
  }
  try {
    result.slo = finalize_slo(result.traces, p->config.slo_target_us);
  } catch (const TraceError& e) {
    p->fail("slo", e.what());
  }
  result.error = p->error;

  p->writer.json(kSloFile, slo_to_json(result.slo));
  p->writer.json(kSummaryFile, summary_to_json(result.summary));
  nlohmann::json info = {{"clock_offset_us", result.clock_offset_us},
                         {"window_samples", p->config.window_samples},
                         {"gate_threshold", p->config.gate_threshold},
                         {"slo_target_us", p->config.slo_target_us},
                         {"transcriber", p->stages.transcriber->id()},
                         {"predictor", p->stages.predictor->id()},
                         {"classifier", p->stages.classifier ? p->stages.classifier->id() : "none"},
                         {"error", result.error.empty() ? nlohmann::json(nullptr) : nlohmann::json(result.error)}};
  info.update(run_info_);
  p->writer.json(kRunInfoFile, info);
  p->threads.clear();
  p->started = false;
  return result;
}

}  // namespace emsrt::runtime
