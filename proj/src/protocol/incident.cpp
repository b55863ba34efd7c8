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

#include "emsrt/protocol/incident.hpp"

#include <regex>

#include "emsrt/common/error.hpp"

namespace emsrt::protocol {

IncidentState accumulate(IncidentState state, const audio::TranscriptSegment& segment) {
  if (!state.window_ids.insert(segment.window_id).second)
    throw DuplicateSegment("window " + std::to_string(segment.window_id) + " already accumulated");
  ++state.segments_seen;
  if (segment.text.empty()) return state;
  if (!state.accumulated_text.empty()) state.accumulated_text += ' ';
  state.accumulated_text += segment.text;
  if (auto age = extract_age(segment.text)) state.extracted_age = age;
  return state;
}

std::optional<int> extract_age(const std::string& text) {
  // Group 1: "N year(s) old" forms; group 2: "N yo"; group 3: "age(d) N".
  static const std::regex pattern(
      R"(\b(\d{1,3})[\s-]*(?:years?|yrs?)[\s-]*old\b|\b(\d{1,3})\s*(?:yo|y/o|y\.o\.)(?![a-z0-9])|\baged?[\s:]+(\d{1,3})\b)",
      std::regex::icase | std::regex::ECMAScript);
  for (auto it = std::sregex_iterator(text.begin(), text.end(), pattern); it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    for (int g = 1; g <= 3; ++g) {
      if (!m[g].matched) continue;
      const int n = std::stoi(m[g].str());
      if (n >= 0 && n <= 130) return n;
    }
  }
  return std::nullopt;
}

}  // namespace emsrt::protocol
