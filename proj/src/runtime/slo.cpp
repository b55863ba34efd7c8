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

#include "emsrt/runtime/slo.hpp"

#include <algorithm>
#include <cmath>

#include "emsrt/common/error.hpp"

namespace emsrt::runtime {
namespace {

struct StageSpan {
  const char* name;
  TimestampUs LatencyTrace::*from;
  TimestampUs LatencyTrace::*to;
};

constexpr StageSpan kStages[] = {
    {"asr_wait", &LatencyTrace::t_window_ready, &LatencyTrace::t_asr_start},
    {"asr", &LatencyTrace::t_asr_start, &LatencyTrace::t_asr_done},
    {"protocol_wait", &LatencyTrace::t_asr_done, &LatencyTrace::t_protocol_start},
    {"protocol", &LatencyTrace::t_protocol_start, &LatencyTrace::t_protocol_done},
    {"feedback_wait", &LatencyTrace::t_feedback_enqueued, &LatencyTrace::t_feedback_dequeued},
    {"feedback_send", &LatencyTrace::t_feedback_dequeued, &LatencyTrace::t_feedback_sent},
    {"protocol_feedback", &LatencyTrace::t_asr_start, &LatencyTrace::t_feedback_sent},
    {"vision", &LatencyTrace::t_vision_start, &LatencyTrace::t_vision_done},
    {"intervention_feedback", &LatencyTrace::t_asr_start, &LatencyTrace::t_intervention_sent},
};

nlohmann::json percentiles_json(const Percentiles& p) {
  return {{"count", p.count}, {"p50_us", p.p50}, {"p95_us", p.p95}, {"max_us", p.max}};
}

}  // namespace

std::int64_t nearest_rank(const std::vector<std::int64_t>& sorted, double p) {
  const auto n = sorted.size();
  auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return sorted[rank - 1];
}

Percentiles summarize(std::vector<std::int64_t> samples) {
  Percentiles out;
  out.count = samples.size();
  if (samples.empty()) return out;
  std::sort(samples.begin(), samples.end());
  out.p50 = nearest_rank(samples, 0.50);
  out.p95 = nearest_rank(samples, 0.95);
  out.max = samples.back();
  return out;
}

SloReport finalize_slo(const std::vector<LatencyTrace>& traces, std::int64_t slo_target_us) {
  SloReport report;
  report.slo_target_us = slo_target_us;
  for (const auto& t : traces) {
    if (auto bad = first_ordering_violation(t); !bad.empty())
      throw TraceError("window " + std::to_string(t.window_id) + ": " + bad);
  }
  std::vector<const LatencyTrace*> ordered;
  for (const auto& t : traces) ordered.push_back(&t);
  std::sort(ordered.begin(), ordered.end(),
            [](const LatencyTrace* a, const LatencyTrace* b) { return a->window_id < b->window_id; });

  for (const auto* t : ordered) {
    if (!t->t_asr_start || !t->t_feedback_sent) continue;
    const auto latency = *t->t_feedback_sent - *t->t_asr_start;
    const bool violation = latency > slo_target_us;
    report.windows.push_back({t->window_id, latency, violation});
    if (violation) report.violations.push_back(t->window_id);
  }
  for (const auto& stage : kStages) {
    std::vector<std::int64_t> samples;
    for (const auto* t : ordered) {
      const auto& a = t->*stage.from;
      const auto& b = t->*stage.to;
      if (a && b) samples.push_back(*b - *a);
    }
    report.stages[stage.name] = summarize(std::move(samples));
  }
  return report;
}

nlohmann::json slo_to_json(const SloReport& report) {
  nlohmann::json windows = nlohmann::json::array();
  for (const auto& w : report.windows)
    windows.push_back({{"window_id", w.window_id}, {"latency_us", w.latency_us}, {"violation", w.violation}});
  nlohmann::json stages = nlohmann::json::object();
  for (const auto& [name, p] : report.stages) stages[name] = percentiles_json(p);
  return {{"slo_target_us", report.slo_target_us},
          {"windows", windows},
          {"violations", report.violations},
          {"stages", stages}};
}

}  // namespace emsrt::runtime
