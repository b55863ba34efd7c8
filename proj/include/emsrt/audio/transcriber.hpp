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
#include <string>
#include <vector>

#include "emsrt/audio/window.hpp"
#include "emsrt/common/line_channel.hpp"

namespace emsrt::audio {

struct TranscriptSegment {
  std::uint32_t window_id = 0;
  std::string text;
  std::string transcriber_id;
  std::int64_t produced_ts_us = 0;
  bool timed_out = false;
};

/// Reference text with its position in capture time (seconds from stream start).
struct AlignedText {
  double start_s = 0;
  double end_s = 0;
  std::string text;
};

/// Speech recognition stage contract: exactly one segment per window.
/// Implementations are driven from a single worker and need not be reentrant.
class Transcriber {
 public:
  virtual ~Transcriber() = default;
  virtual TranscriptSegment transcribe(const AudioWindow& window) = 0;
  virtual std::string id() const = 0;
};

/// Always returns empty text.
class NullTranscriber final : public Transcriber {
 public:
  TranscriptSegment transcribe(const AudioWindow& window) override;
  std::string id() const override { return "null"; }
};

/// Replays a reference alignment: the text of every segment whose [start,end)
/// overlaps the window's capture interval, in time order, joined by one space.
class ReplayTranscriber final : public Transcriber {
 public:
  explicit ReplayTranscriber(std::vector<AlignedText> alignment);
  TranscriptSegment transcribe(const AudioWindow& window) override;
  std::string id() const override { return "replay"; }

 private:
  std::vector<AlignedText> alignment_;
};

/// Sleeps for a fixed delay before delegating; models inference cost.
class DelayedTranscriber final : public Transcriber {
 public:
  DelayedTranscriber(std::unique_ptr<Transcriber> inner, std::chrono::milliseconds delay)
      : inner_(std::move(inner)), delay_(delay) {}
  TranscriptSegment transcribe(const AudioWindow& window) override;
  std::string id() const override { return inner_->id(); }

 private:
  std::unique_ptr<Transcriber> inner_;
  std::chrono::milliseconds delay_;
};

/// Talks to an external speech engine over the line protocol:
///
///   request   {"v":1,"window_id":N,"sample_rate":16000,"pcm_b64":"<LE int16>"}
///   response  {"window_id":N,"text":"..."}
///
/// A response that does not arrive within the timeout yields an empty segment
/// with timed_out set; the pipeline carries on.
class AdapterTranscriber final : public Transcriber {
 public:
  AdapterTranscriber(std::unique_ptr<LineChannel> channel, std::chrono::milliseconds timeout);
  TranscriptSegment transcribe(const AudioWindow& window) override;
  std::string id() const override { return "adapter"; }

  std::uint64_t timeouts() const { return timeouts_; }

 private:
  JsonAdapterClient client_;
  std::chrono::milliseconds timeout_;
  std::uint64_t timeouts_ = 0;
};

/// Default adapter timeout.
inline constexpr std::chrono::milliseconds kDefaultAdapterTimeout{3500};

}  // namespace emsrt::audio
