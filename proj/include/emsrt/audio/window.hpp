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
#include <optional>
#include <vector>

#include "emsrt/wire/packets.hpp"

namespace emsrt::audio {

/// True four seconds at 16 kHz.
inline constexpr std::uint32_t kDefaultWindowSamples = 64000;
/// The product printed alongside "four seconds" in the original setup.
inline constexpr std::uint32_t kLegacyWindowSamples = 48000;

/// A fixed-length block of mono PCM in capture time.
///
/// The capture interval is [start_ts_us, end_ts_us): end_ts_us is the
/// timestamp of the sample just past the window, so consecutive windows tile
/// the timeline without overlap.
struct AudioWindow {
  std::uint32_t window_id = 0;
  std::vector<std::int16_t> samples;
  std::uint64_t start_ts_us = 0;
  std::uint64_t end_ts_us = 0;
  std::uint32_t gap_samples = 0;  // zeros substituted for lost packets
  std::uint32_t pad_samples = 0;  // trailing zeros added by flush()

  friend bool operator==(const AudioWindow&, const AudioWindow&) = default;
};

/// Turns a packet stream into fixed-size windows.
///
/// Emits exactly window_samples per window and carries the remainder into the
/// next one. Sequence gaps are zero-filled (and counted in gap_samples) so the
/// sample timeline stays aligned with capture time; packets older than the
/// newest accepted one are discarded as late.
class WindowAccumulator {
 public:
  explicit WindowAccumulator(std::uint32_t window_samples = kDefaultWindowSamples,
                             std::uint32_t max_gap_packets = 4096);

  /// Zero or one window for window_samples >= 1024; smaller windows may
  /// produce several per packet.
  std::vector<AudioWindow> push(const wire::AudioPacket& packet);

  /// Emits the buffered remainder zero-padded to a full window, if any.
  std::optional<AudioWindow> flush();

  std::uint32_t window_samples() const { return window_samples_; }
  std::uint64_t late_packets() const { return late_packets_; }
  std::uint64_t total_gap_samples() const { return total_gap_samples_; }
  std::size_t buffered() const { return buffer_.size(); }

 private:
  AudioWindow take(std::size_t real_samples);
  std::uint64_t ts_at(std::uint64_t index) const;

  std::uint32_t window_samples_;
  std::uint32_t max_gap_packets_;
  bool started_ = false;
  std::uint32_t next_seq_ = 0;
  std::uint64_t base_ts_us_ = 0;
  std::uint64_t buffer_start_index_ = 0;  // sample index of buffer_[0] since stream start
  std::vector<std::int16_t> buffer_;
  std::vector<std::uint8_t> gap_mask_;
  std::uint32_t next_window_id_ = 0;
  std::uint64_t late_packets_ = 0;
  std::uint64_t total_gap_samples_ = 0;
};

}  // namespace emsrt::audio
