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

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "emsrt/common/clock.hpp"

namespace emsrt::wire {

// UDP audio datagram (all integers little-endian):
//   0  magic        "EMSA"
//   4  seq          u32
//   8  capture_ts   u64, microseconds since stream epoch
//  16  sample_count u16, always 1024
//  18  samples      sample_count x i16 PCM, 16 kHz mono
//
// UDP video datagram:
//   0  magic        "EMSV"
//   4  frame_id     u32
//   8  frag_index   u16
//  10  frag_count   u16
//  12  capture_ts   u64
//  20  payload      1..1200 bytes of the encoded image

inline constexpr std::array<std::uint8_t, 4> kAudioMagic = {'E', 'M', 'S', 'A'};
inline constexpr std::array<std::uint8_t, 4> kVideoMagic = {'E', 'M', 'S', 'V'};

inline constexpr std::uint32_t kSampleRateHz = 16000;
inline constexpr std::uint16_t kSamplesPerPacket = 1024;
inline constexpr std::size_t kAudioHeaderBytes = 18;
inline constexpr std::size_t kAudioPacketBytes = kAudioHeaderBytes + 2 * kSamplesPerPacket;

inline constexpr std::size_t kVideoHeaderBytes = 20;
inline constexpr std::size_t kMaxFragmentPayload = 1200;
inline constexpr std::size_t kMaxFragmentsPerFrame = 0xFFFF;
inline constexpr std::size_t kMaxFrameBytes = kMaxFragmentsPerFrame * kMaxFragmentPayload;

/// Duration of one packet of audio.
inline constexpr std::chrono::microseconds kPacketDuration{1'000'000LL * kSamplesPerPacket /
                                                           kSampleRateHz};

/// Timestamp offset of the n-th sample after a reference sample (floor).
constexpr std::uint64_t samples_to_us(std::uint64_t samples) {
  return samples * 1'000'000ULL / kSampleRateHz;
}

struct AudioPacket {
  std::uint32_t seq = 0;
  std::uint64_t capture_ts_us = 0;
  std::vector<std::int16_t> samples;

  friend bool operator==(const AudioPacket&, const AudioPacket&) = default;
};

struct VideoFragment {
  std::uint32_t frame_id = 0;
  std::uint16_t frag_index = 0;
  std::uint16_t frag_count = 0;
  std::uint64_t capture_ts_us = 0;
  std::vector<std::uint8_t> payload;

  friend bool operator==(const VideoFragment&, const VideoFragment&) = default;
};

/// A fully reassembled encoded image.
struct VideoFrame {
  std::uint32_t frame_id = 0;
  std::uint64_t capture_ts_us = 0;
  std::vector<std::uint8_t> bytes;

  friend bool operator==(const VideoFrame&, const VideoFrame&) = default;
};

/// Throws EncodingError unless samples.size() == 1024.
std::vector<std::uint8_t> encode_audio_packet(std::uint32_t seq, std::uint64_t capture_ts_us,
                                              std::span<const std::int16_t> samples);

/// Throws MalformedPacket on bad magic, short header, wrong sample count or a
/// payload length that disagrees with the header.
AudioPacket decode_audio_packet(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_video_fragment(const VideoFragment& fragment);
VideoFragment decode_video_fragment(std::span<const std::uint8_t> bytes);

/// Splits an image into ceil(len/1200) fragments. Throws EncodingError on an
/// empty frame or one that needs more than 65535 fragments.
std::vector<VideoFragment> fragment_frame(std::uint32_t frame_id, std::uint64_t capture_ts_us,
                                          std::span<const std::uint8_t> image);

/// Collects fragments of many frames concurrently in flight. A frame is
/// emitted once all its fragments are present; frames that stay incomplete
/// for longer than the timeout are discarded by expire().
class FrameReassembler {
 public:
  explicit FrameReassembler(std::chrono::milliseconds timeout) : timeout_(timeout) {}

  /// Inserts a fragment. Returns the frame when this fragment completed it.
  /// Duplicates and fragments of already-finished frames are ignored.
  std::optional<VideoFrame> offer(const VideoFragment& fragment, Clock::time_point now);

  /// Drops frames whose first fragment arrived more than `timeout` before
  /// `now`. Returns their ids.
  std::vector<std::uint32_t> expire(Clock::time_point now);

  std::uint64_t completed() const { return completed_; }
  std::uint64_t dropped() const { return dropped_; }
  std::uint64_t duplicates() const { return duplicates_; }
  std::size_t pending() const { return partial_.size(); }

 private:
  struct Partial {
    Clock::time_point first_seen;
    std::uint64_t capture_ts_us = 0;
    std::vector<std::optional<std::vector<std::uint8_t>>> parts;
    std::size_t received = 0;
  };

  std::chrono::milliseconds timeout_;
  std::map<std::uint32_t, Partial> partial_;
  std::vector<std::uint32_t> recently_finished_;  // small ring of completed/dropped ids
  std::uint64_t completed_ = 0;
  std::uint64_t dropped_ = 0;
  std::uint64_t duplicates_ = 0;

  bool recently_finished(std::uint32_t frame_id) const;
  void remember_finished(std::uint32_t frame_id);
};

/// Reassembles one frame from a complete delivery. Order and duplicates do
/// not matter; a missing fragment throws FrameDropped.
std::vector<std::uint8_t> reassemble_frame(std::span<const VideoFragment> fragments);

}  // namespace emsrt::wire
