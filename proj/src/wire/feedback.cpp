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

#include "emsrt/wire/feedback.hpp"

#include <cmath>

#include <json.hpp>

#include "emsrt/common/error.hpp"

namespace emsrt::wire {

using nlohmann::json;

const char* to_string(FeedbackKind kind) {
  return kind == FeedbackKind::Protocol ? "protocol" : "intervention";
}

std::vector<std::uint8_t> encode_feedback(const FeedbackMessage& msg) {
  if (msg.label.empty()) throw EncodingError("feedback label must not be empty");
  if (!std::isfinite(msg.confidence) || msg.confidence < 0.0 || msg.confidence > 1.0) {
    throw EncodingError("feedback confidence must lie in [0,1]");
  }
  json body = {
      {"v", kFeedbackSchemaVersion},
      {"kind", to_string(msg.kind)},
      {"window_id", msg.window_id},
      {"label", msg.label},
      {"confidence", msg.confidence},
      {"emitted_ts_us", msg.emitted_ts_us},
      {"trace", msg.trace ? trace_to_json(*msg.trace) : json(nullptr)},
  };
  std::string text;
  try {
    text = body.dump();
  } catch (const json::exception& e) {
    throw EncodingError(std::string("feedback label is not valid UTF-8: ") + e.what());
  }
  if (text.size() > kMaxFeedbackBody) throw EncodingError("feedback body exceeds 1 MiB");
  const auto n = static_cast<std::uint32_t>(text.size());
  std::vector<std::uint8_t> out{static_cast<std::uint8_t>(n >> 24), static_cast<std::uint8_t>(n >> 16),
                                static_cast<std::uint8_t>(n >> 8), static_cast<std::uint8_t>(n)};
  out.insert(out.end(), text.begin(), text.end());
  return out;
}

FeedbackMessage decode_feedback(std::span<const std::uint8_t> frame) {
  if (frame.size() < 4) throw MalformedPacket("feedback frame shorter than length prefix");
  const std::uint32_t n = (std::uint32_t{frame[0]} << 24) | (std::uint32_t{frame[1]} << 16) |
                          (std::uint32_t{frame[2]} << 8) | std::uint32_t{frame[3]};
  if (n > kMaxFeedbackBody) throw MalformedPacket("feedback body exceeds 1 MiB");
  if (frame.size() - 4 != n) throw MalformedPacket("feedback length prefix disagrees with frame");
  auto body = json::parse(frame.begin() + 4, frame.end(), nullptr, /*allow_exceptions=*/false);
  if (body.is_discarded() || !body.is_object()) throw MalformedPacket("feedback body is not JSON");
  try {
    FeedbackMessage msg;
    const auto kind = body.at("kind").get<std::string>();
    if (kind == "protocol") {
      msg.kind = FeedbackKind::Protocol;
    } else if (kind == "intervention") {
      msg.kind = FeedbackKind::Intervention;
    } else {
      throw MalformedPacket("unknown feedback kind '" + kind + "'");
    }
    msg.window_id = body.at("window_id").get<std::uint32_t>();
    msg.label = body.at("label").get<std::string>();
    msg.confidence = body.at("confidence").get<double>();
    msg.emitted_ts_us = body.at("emitted_ts_us").get<std::uint64_t>();
    if (const auto& t = body.at("trace"); !t.is_null()) msg.trace = trace_from_json(t);
    if (msg.label.empty() || !(msg.confidence >= 0.0 && msg.confidence <= 1.0)) {
      throw MalformedPacket("feedback fields out of range");
    }
    return msg;
  } catch (const json::exception& e) {
    throw MalformedPacket(std::string("feedback body schema: ") + e.what());
  }
}

std::vector<FeedbackMessage> FeedbackStreamDecoder::feed(std::span<const std::uint8_t> bytes) {
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
  std::vector<FeedbackMessage> out;
  std::size_t off = 0;
  while (buffer_.size() - off >= 4) {
    const std::uint8_t* p = buffer_.data() + off;
    const std::uint32_t n = (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) |
                            (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
    if (n > kMaxFeedbackBody) throw MalformedPacket("feedback body exceeds 1 MiB");
    if (buffer_.size() - off < 4 + std::size_t{n}) break;
    out.push_back(decode_feedback(std::span(buffer_).subspan(off, 4 + std::size_t{n})));
    off += 4 + n;
  }
  buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(off));
  return out;
}

}  // namespace emsrt::wire
