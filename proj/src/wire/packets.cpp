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

#include "emsrt/wire/packets.hpp"

#include <algorithm>
#include <cstring>
#include <string>

#include "emsrt/common/error.hpp"

namespace emsrt::wire {
namespace {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(value) >> (8 * i)));
  }
}

template <typename T>
T get_le(std::span<const std::uint8_t> bytes, std::size_t offset) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<std::uint64_t>(bytes[offset + i]) << (8 * i);
  }
  return static_cast<T>(v);
}

bool has_magic(std::span<const std::uint8_t> bytes, const std::array<std::uint8_t, 4>& magic) {
  return bytes.size() >= 4 && std::equal(magic.begin(), magic.end(), bytes.begin());
}

constexpr std::size_t kRecentRing = 256;

}  // namespace

std::vector<std::uint8_t> encode_audio_packet(std::uint32_t seq, std::uint64_t capture_ts_us,
                                              std::span<const std::int16_t> samples) {
  if (samples.size() != kSamplesPerPacket) {
    throw EncodingError("audio packet needs exactly 1024 samples, got " +
                        std::to_string(samples.size()));
  }
  std::vector<std::uint8_t> out;
  out.reserve(kAudioPacketBytes);
  out.insert(out.end(), kAudioMagic.begin(), kAudioMagic.end());
  put_le(out, seq);
  put_le(out, capture_ts_us);
  put_le(out, kSamplesPerPacket);
  for (std::int16_t s : samples) put_le(out, static_cast<std::uint16_t>(s));
  return out;
}

AudioPacket decode_audio_packet(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kAudioHeaderBytes) {
    throw MalformedPacket("audio packet shorter than header (" + std::to_string(bytes.size()) +
                          " bytes)");
  }
  if (!has_magic(bytes, kAudioMagic)) throw MalformedPacket("bad audio magic");
  const auto count = get_le<std::uint16_t>(bytes, 16);
  if (count != kSamplesPerPacket) {
    throw MalformedPacket("unexpected sample_count " + std::to_string(count));
  }
  if (bytes.size() != kAudioHeaderBytes + 2 * std::size_t{count}) {
    throw MalformedPacket("audio payload length " + std::to_string(bytes.size() - kAudioHeaderBytes) +
                          " does not match sample_count");
  }
  AudioPacket pkt;
  pkt.seq = get_le<std::uint32_t>(bytes, 4);
  pkt.capture_ts_us = get_le<std::uint64_t>(bytes, 8);
  pkt.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    pkt.samples[i] = static_cast<std::int16_t>(get_le<std::uint16_t>(bytes, kAudioHeaderBytes + 2 * i));
  }
  return pkt;
}

std::vector<std::uint8_t> encode_video_fragment(const VideoFragment& f) {
  if (f.frag_index >= f.frag_count) throw EncodingError("frag_index must be < frag_count");
  if (f.payload.empty() || f.payload.size() > kMaxFragmentPayload) {
    throw EncodingError("fragment payload must be 1..1200 bytes");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kVideoHeaderBytes + f.payload.size());
  out.insert(out.end(), kVideoMagic.begin(), kVideoMagic.end());
  put_le(out, f.frame_id);
  put_le(out, f.frag_index);
  put_le(out, f.frag_count);
  put_le(out, f.capture_ts_us);
  out.insert(out.end(), f.payload.begin(), f.payload.end());
  return out;
}

VideoFragment decode_video_fragment(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kVideoHeaderBytes) throw MalformedPacket("video fragment shorter than header");
  if (!has_magic(bytes, kVideoMagic)) throw MalformedPacket("bad video magic");
  VideoFragment f;
  f.frame_id = get_le<std::uint32_t>(bytes, 4);
  f.frag_index = get_le<std::uint16_t>(bytes, 8);
  f.frag_count = get_le<std::uint16_t>(bytes, 10);
  f.capture_ts_us = get_le<std::uint64_t>(bytes, 12);
  if (f.frag_index >= f.frag_count) throw MalformedPacket("frag_index out of range");
  const std::size_t len = bytes.size() - kVideoHeaderBytes;
  if (len == 0 || len > kMaxFragmentPayload) throw MalformedPacket("bad fragment payload length");
  f.payload.assign(bytes.begin() + kVideoHeaderBytes, bytes.end());
  return f;
}

std::vector<VideoFragment> fragment_frame(std::uint32_t frame_id, std::uint64_t capture_ts_us,
                                          std::span<const std::uint8_t> image) {
  if (image.empty()) throw EncodingError("cannot fragment an empty frame");
  if (image.size() > kMaxFrameBytes) {
    throw EncodingError("frame of " + std::to_string(image.size()) + " bytes exceeds the 65535-fragment limit");
  }
  const std::size_t count = (image.size() + kMaxFragmentPayload - 1) / kMaxFragmentPayload;
  std::vector<VideoFragment> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t begin = i * kMaxFragmentPayload;
    const std::size_t end = std::min(image.size(), begin + kMaxFragmentPayload);
    out.push_back(VideoFragment{frame_id, static_cast<std::uint16_t>(i),
                                static_cast<std::uint16_t>(count), capture_ts_us,
                                {image.begin() + begin, image.begin() + end}});
  }
  return out;
}

bool FrameReassembler::recently_finished(std::uint32_t frame_id) const {
  return std::find(recently_finished_.begin(), recently_finished_.end(), frame_id) !=
         recently_finished_.end();
}

void FrameReassembler::remember_finished(std::uint32_t frame_id) {
  if (recently_finished_.size() >= kRecentRing) {
    recently_finished_.erase(recently_finished_.begin());
  }
  recently_finished_.push_back(frame_id);
}

std::optional<VideoFrame> FrameReassembler::offer(const VideoFragment& fragment,
                                                  Clock::time_point now) {
  if (fragment.frag_index >= fragment.frag_count) return std::nullopt;
  auto it = partial_.find(fragment.frame_id);
  if (it == partial_.end()) {
    if (recently_finished(fragment.frame_id)) {
      ++duplicates_;
      return std::nullopt;
    }
    Partial p;
    p.first_seen = now;
    p.capture_ts_us = fragment.capture_ts_us;
    p.parts.resize(fragment.frag_count);
    it = partial_.emplace(fragment.frame_id, std::move(p)).first;
  }
  Partial& p = it->second;
  // A fragment disagreeing on geometry or timestamp belongs to some other
  // frame that reused the id; ignore it rather than corrupt this one.
  if (p.parts.size() != fragment.frag_count || p.capture_ts_us != fragment.capture_ts_us) {
    return std::nullopt;
  }
  auto& slot = p.parts[fragment.frag_index];
  if (slot) {
    ++duplicates_;
    return std::nullopt;
  }
  slot = fragment.payload;
  if (++p.received < p.parts.size()) return std::nullopt;

  VideoFrame frame;
  frame.frame_id = fragment.frame_id;
  frame.capture_ts_us = p.capture_ts_us;
  for (auto& part : p.parts) frame.bytes.insert(frame.bytes.end(), part->begin(), part->end());
  partial_.erase(it);
  remember_finished(frame.frame_id);
  ++completed_;
  return frame;
}

std::vector<std::uint32_t> FrameReassembler::expire(Clock::time_point now) {
  std::vector<std::uint32_t> dropped;
  for (auto it = partial_.begin(); it != partial_.end();) {
    if (now - it->second.first_seen > timeout_) {
      dropped.push_back(it->first);
      remember_finished(it->first);
      it = partial_.erase(it);
      ++dropped_;
    } else {
      ++it;
    }
  }
  return dropped;
}

std::vector<std::uint8_t> reassemble_frame(std::span<const VideoFragment> fragments) {
  if (fragments.empty()) throw FrameDropped("no fragments delivered");
  FrameReassembler r(std::chrono::milliseconds(0));
  const auto now = Clock::now();
  const std::uint32_t id = fragments.front().frame_id;
  for (const auto& f : fragments) {
    if (f.frame_id != id) continue;
    if (auto frame = r.offer(f, now)) return std::move(frame->bytes);
  }
  throw FrameDropped("frame " + std::to_string(id) + " incomplete at timeout");
}

}  // namespace emsrt::wire
