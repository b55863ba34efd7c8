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
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "emsrt/common/trace.hpp"

namespace emsrt::runtime {

inline constexpr std::int64_t kDefaultSloTargetUs = 4'000'000;

struct Percentiles {
  std::size_t count = 0;
  std::int64_t p50 = 0;
  std::int64_t p95 = 0;
  std::int64_t max = 0;
};

/// Nearest-rank percentile: sorted[ceil(p * n) - 1]. `sorted` must be nonempty
/// and ascending; p in (0, 1].
std::int64_t nearest_rank(const std::vector<std::int64_t>& sorted, double p);

Percentiles summarize(std::vector<std::int64_t> samples);

struct WindowLatency {
  std::uint32_t window_id = 0;
  std::int64_t latency_us = 0;  // t_feedback_sent - t_asr_start
  bool violation = false;
};

struct SloReport {
  std::int64_t slo_target_us = kDefaultSloTargetUs;
  std::vector<WindowLatency> windows;  // ascending window id
  std::vector<std::uint32_t> violations;
  /// Keyed by stage: asr, asr_wait, protocol, protocol_wait, feedback_wait,
  /// feedback_send, protocol_feedback, vision, intervention_feedback.
  std::map<std::string, Percentiles> stages;
};

/// Protocol-feedback latency per window runs from t_asr_start to
/// t_feedback_sent; a window violates the objective iff latency > target.
/// Traces lacking either endpoint are excluded from the latency list.
/// Throws TraceError naming the window when any trace is out of order.
SloReport finalize_slo(const std::vector<LatencyTrace>& traces, std::int64_t slo_target_us = kDefaultSloTargetUs);

nlohmann::json slo_to_json(const SloReport& report);

}  // namespace emsrt::runtime
