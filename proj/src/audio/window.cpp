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

#include "emsrt/audio/window.hpp"

#include <algorithm>

namespace emsrt::audio {

WindowAccumulator::WindowAccumulator(std::uint32_t window_samples, std::uint32_t max_gap_packets)
    : window_samples_(std::max<std::uint32_t>(window_samples, 1)),
      max_gap_packets_(max_gap_packets) {}

std::uint64_t WindowAccumulator::ts_at(std::uint64_t index) const {
  return base_ts_us_ + wire::samples_to_us(index);
}

std::vector<AudioWindow> WindowAccumulator::push(const wire::AudioPacket& packet) {
  if (!started_) {
    started_ = true;
    next_seq_ = packet.seq;
    base_ts_us_ = packet.capture_ts_us;
  }
  if (packet.seq < next_seq_) {
    ++late_packets_;
    return {};
  }
  if (packet.seq > next_seq_) {
    // Very long outages are clamped so a corrupt seq cannot exhaust memory.
    const std::uint64_t missing = std::min<std::uint64_t>(packet.seq - next_seq_, max_gap_packets_);
    const std::size_t fill = missing * wire::kSamplesPerPacket;
    buffer_.insert(buffer_.end(), fill, 0);
    gap_mask_.insert(gap_mask_.end(), fill, 1);
    total_gap_samples_ += fill;
  }
  buffer_.insert(buffer_.end(), packet.samples.begin(), packet.samples.end());
  gap_mask_.insert(gap_mask_.end(), packet.samples.size(), 0);
  next_seq_ = packet.seq + 1;

  std::vector<AudioWindow> out;
  while (buffer_.size() >= window_samples_) out.push_back(take(window_samples_));
  return out;
}

std::optional<AudioWindow> WindowAccumulator::flush() {
  if (buffer_.empty()) return std::nullopt;
  const std::size_t real = buffer_.size();
  buffer_.resize(window_samples_, 0);
  gap_mask_.resize(window_samples_, 0);
  return take(real);
}

AudioWindow WindowAccumulator::take(std::size_t real_samples) {
  const auto w = static_cast<std::ptrdiff_t>(window_samples_);
  AudioWindow win;
  win.window_id = next_window_id_++;
  win.samples.assign(buffer_.begin(), buffer_.begin() + w);
  win.start_ts_us = ts_at(buffer_start_index_);
  win.end_ts_us = ts_at(buffer_start_index_ + window_samples_);
  win.gap_samples = static_cast<std::uint32_t>(
      std::count(gap_mask_.begin(), gap_mask_.begin() + w, std::uint8_t{1}));
  win.pad_samples = static_cast<std::uint32_t>(window_samples_ - real_samples);
  buffer_.erase(buffer_.begin(), buffer_.begin() + w);
  gap_mask_.erase(gap_mask_.begin(), gap_mask_.begin() + w);
  buffer_start_index_ += window_samples_;
  return win;
}

}  // namespace emsrt::audio
