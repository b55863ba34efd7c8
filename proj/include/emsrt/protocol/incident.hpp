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
#include <set>
#include <string>

#include "emsrt/audio/transcriber.hpp"

namespace emsrt::protocol {

struct IncidentState {
  std::string accumulated_text;
  std::uint32_t segments_seen = 0;
  std::optional<int> extracted_age;
  std::set<std::uint32_t> window_ids;
};

/// Appends the segment's text (single-space join, empty text skipped) and
/// re-runs age extraction on the new text only; a newly found age replaces
/// the previous one. Throws DuplicateSegment on a repeated window id.
IncidentState accumulate(IncidentState state, const audio::TranscriptSegment& segment);

/// First age mention in `text` by position, case-insensitive:
///   "N-year-old", "N year old", "N years old", "N yr old", "N yo", "N y/o",
///   "age N", "aged N".
/// Mentions with N outside [0, 130] are skipped.
std::optional<int> extract_age(const std::string& text);

inline constexpr int kPediatricMaxAge = 18;

}  // namespace emsrt::protocol
