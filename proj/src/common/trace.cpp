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

#include "emsrt/common/trace.hpp"

#include <span>

namespace emsrt {
namespace {

std::string check_chain(const LatencyTrace& trace, std::span<const TraceField> chain) {
  std::optional<std::int64_t> last;
  for (const auto& field : chain) {
    const auto& value = trace.*(field.member);
    if (!value) continue;
    if (last && *value < *last) return field.name;
    last = value;
  }
  return {};
}

}  // namespace

nlohmann::json trace_to_json(const LatencyTrace& trace) {
  nlohmann::json j;
  j["window_id"] = trace.window_id;
  for (const auto& f : kAllTraceFields) {
    if (const auto& v = trace.*(f.member)) j[f.name] = *v;
  }
  return j;
}

LatencyTrace trace_from_json(const nlohmann::json& j) {
  LatencyTrace t;
  t.window_id = j.at("window_id").get<std::uint32_t>();
  for (const auto& f : kAllTraceFields) {
    if (auto it = j.find(f.name); it != j.end() && !it->is_null()) {
      t.*(f.member) = it->get<std::int64_t>();
    }
  }
  return t;
}

std::string first_ordering_violation(const LatencyTrace& trace) {
  if (auto bad = check_chain(trace, kProtocolPath); !bad.empty()) return bad;
  return check_chain(trace, kVisionPath);
}

}  // namespace emsrt
