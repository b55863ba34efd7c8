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
#include <span>
#include <string>
#include <vector>

#include "emsrt/common/trace.hpp"

namespace emsrt::wire {

// TCP feedback frame: u32 big-endian body length, then a UTF-8 JSON body:
//
//   {"v":1, "kind":"protocol"|"intervention", "window_id":u32, "label":str,
//    "confidence":real, "emitted_ts_us":u64, "trace":{...}|null}
//
// "trace" carries the LatencyTrace snapshot at emission (see trace_to_json).

enum class FeedbackKind { Protocol, Intervention };

inline constexpr std::size_t kMaxFeedbackBody = 1 << 20;
inline constexpr int kFeedbackSchemaVersion = 1;

struct FeedbackMessage {
  FeedbackKind kind = FeedbackKind::Protocol;
  std::uint32_t window_id = 0;
  std::string label;
  double confidence = 0.0;
  std::uint64_t emitted_ts_us = 0;
  std::optional<LatencyTrace> trace;

  friend bool operator==(const FeedbackMessage&, const FeedbackMessage&) = default;
};

const char* to_string(FeedbackKind kind);

/// Throws EncodingError for an empty label, a confidence outside [0,1] or a
/// body over 1 MiB.
std::vector<std::uint8_t> encode_feedback(const FeedbackMessage& msg);

/// Decodes exactly one frame. Throws MalformedPacket.
FeedbackMessage decode_feedback(std::span<const std::uint8_t> frame);

/// Incremental decoder for a TCP byte stream.
class FeedbackStreamDecoder {
 public:
  /// Appends bytes and returns every frame completed by them.
  std::vector<FeedbackMessage> feed(std::span<const std::uint8_t> bytes);

  std::size_t buffered() const { return buffer_.size(); }

 private:
  std::vector<std::uint8_t> buffer_;
};

}  // namespace emsrt::wire
