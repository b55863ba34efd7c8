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

#include "emsrt/audio/transcriber.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "emsrt/common/base64.hpp"
#include "emsrt/common/clock.hpp"

namespace emsrt::audio {
namespace {

std::int64_t seconds_to_us(double s) { return std::llround(s * 1e6); }

}  // namespace

TranscriptSegment NullTranscriber::transcribe(const AudioWindow& window) {
  return {window.window_id, {}, id(), now_us(), false};
}

ReplayTranscriber::ReplayTranscriber(std::vector<AlignedText> alignment)
    : alignment_(std::move(alignment)) {
  std::stable_sort(alignment_.begin(), alignment_.end(),
                   [](const AlignedText& a, const AlignedText& b) { return a.start_s < b.start_s; });
}

TranscriptSegment ReplayTranscriber::transcribe(const AudioWindow& window) {
  const auto ws = static_cast<std::int64_t>(window.start_ts_us);
  const auto we = static_cast<std::int64_t>(window.end_ts_us);
  std::string text;
  for (const auto& seg : alignment_) {
    if (seconds_to_us(seg.start_s) < we && ws < seconds_to_us(seg.end_s)) {
      if (seg.text.empty()) continue;
      if (!text.empty()) text += ' ';
      text += seg.text;
    }
  }
  return {window.window_id, std::move(text), id(), now_us(), false};
}

TranscriptSegment DelayedTranscriber::transcribe(const AudioWindow& window) {
  std::this_thread::sleep_for(delay_);
  return inner_->transcribe(window);
}

AdapterTranscriber::AdapterTranscriber(std::unique_ptr<LineChannel> channel,
                                       std::chrono::milliseconds timeout)
    : client_(std::move(channel)), timeout_(timeout) {}

TranscriptSegment AdapterTranscriber::transcribe(const AudioWindow& window) {
  std::vector<std::uint8_t> pcm;
  pcm.reserve(window.samples.size() * 2);
  for (std::int16_t s : window.samples) {
    const auto u = static_cast<std::uint16_t>(s);
    pcm.push_back(static_cast<std::uint8_t>(u & 0xFF));
    pcm.push_back(static_cast<std::uint8_t>(u >> 8));
  }
  const nlohmann::json request = {{"v", kAdapterProtocolVersion},
                                  {"window_id", window.window_id},
                                  {"sample_rate", wire::kSampleRateHz},
                                  {"pcm_b64", base64_encode(pcm)}};
  auto response = client_.call(request, "window_id", timeout_);
  if (!response || !response->contains("text") || !(*response)["text"].is_string()) {
    ++timeouts_;
    return {window.window_id, {}, id(), now_us(), true};
  }
  return {window.window_id, (*response)["text"].get<std::string>(), id(), now_us(), false};
}

}  // namespace emsrt::audio
