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
#include <string>
#include <vector>

#include <json.hpp>

namespace emsrt {

using TimestampUs = std::optional<std::int64_t>;

/// Per-window stage timestamps on the process monotonic clock (microseconds).
///
/// Queue hand-offs are recorded on both sides (enqueue/ready and dequeue/start)
/// so that stage latency can be read with or without queue wait.
struct LatencyTrace {
  std::uint32_t window_id = 0;
  TimestampUs t_window_ready;      // window emitted by the chunker
  TimestampUs t_asr_start;         // dequeued by the transcriber worker
  TimestampUs t_asr_done;
  TimestampUs t_protocol_start;    // transcript dequeued by the protocol worker
  TimestampUs t_protocol_done;
  TimestampUs t_feedback_enqueued;
  TimestampUs t_feedback_dequeued;
  TimestampUs t_feedback_sent;
  TimestampUs t_vision_start;
  TimestampUs t_vision_done;
  TimestampUs t_intervention_sent;

  friend bool operator==(const LatencyTrace&, const LatencyTrace&) = default;
};

struct TraceField {
  const char* name;
  TimestampUs LatencyTrace::*member;
};

/// Protocol path fields in required nondecreasing order.
inline constexpr TraceField kProtocolPath[] = {
    {"t_window_ready", &LatencyTrace::t_window_ready},
    {"t_asr_start", &LatencyTrace::t_asr_start},
    {"t_asr_done", &LatencyTrace::t_asr_done},
    {"t_protocol_start", &LatencyTrace::t_protocol_start},
    {"t_protocol_done", &LatencyTrace::t_protocol_done},
    {"t_feedback_enqueued", &LatencyTrace::t_feedback_enqueued},
    {"t_feedback_dequeued", &LatencyTrace::t_feedback_dequeued},
    {"t_feedback_sent", &LatencyTrace::t_feedback_sent},
};

/// Vision path fields, ordered after t_protocol_done.
inline constexpr TraceField kVisionPath[] = {
    {"t_protocol_done", &LatencyTrace::t_protocol_done},
    {"t_vision_start", &LatencyTrace::t_vision_start},
    {"t_vision_done", &LatencyTrace::t_vision_done},
    {"t_intervention_sent", &LatencyTrace::t_intervention_sent},
};

/// Name of the first field that breaks the ordering invariant, or empty when
/// the trace is monotone. Absent fields are skipped.
inline constexpr TraceField kAllTraceFields[] = {
    {"t_window_ready", &LatencyTrace::t_window_ready},
    {"t_asr_start", &LatencyTrace::t_asr_start},
    {"t_asr_done", &LatencyTrace::t_asr_done},
    {"t_protocol_start", &LatencyTrace::t_protocol_start},
    {"t_protocol_done", &LatencyTrace::t_protocol_done},
    {"t_feedback_enqueued", &LatencyTrace::t_feedback_enqueued},
    {"t_feedback_dequeued", &LatencyTrace::t_feedback_dequeued},
    {"t_feedback_sent", &LatencyTrace::t_feedback_sent},
    {"t_vision_start", &LatencyTrace::t_vision_start},
    {"t_vision_done", &LatencyTrace::t_vision_done},
    {"t_intervention_sent", &LatencyTrace::t_intervention_sent},
};

/// Name of the first field that precedes its predecessor on either path, or
/// empty when the trace is ordered.
std::string first_ordering_violation(const LatencyTrace& trace);

/// JSON object with "window_id" and every present timestamp field.
nlohmann::json trace_to_json(const LatencyTrace& trace);
LatencyTrace trace_from_json(const nlohmann::json& j);

}  // namespace emsrt
