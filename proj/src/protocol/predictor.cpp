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

#include "emsrt/protocol/predictor.hpp"

#include "emsrt/common/clock.hpp"
#include "emsrt/common/error.hpp"

namespace emsrt::protocol {

RankedPrediction BuiltinPredictor::predict(const IncidentState& state, std::uint32_t window_id) {
  auto out = refine(scorer_.predict(state.accumulated_text, window_id), state, kb_);
  out.produced_ts_us = now_us();
  return out;
}

AdapterPredictor::AdapterPredictor(const KnowledgeBase& kb, std::unique_ptr<LineChannel> channel,
                                   std::chrono::milliseconds timeout, ScorerConfig fallback)
    : kb_(kb), client_(std::move(channel)), timeout_(timeout), fallback_(kb, fallback) {}

RankedPrediction AdapterPredictor::predict(const IncidentState& state, std::uint32_t window_id) {
  nlohmann::json request = {{"v", kAdapterProtocolVersion}, {"window_id", window_id}, {"text", state.accumulated_text}};
  request["age"] = state.extracted_age ? nlohmann::json(*state.extracted_age) : nlohmann::json(nullptr);
  auto response = client_.call(request, "window_id", timeout_);
  if (!response) {
    auto out = refine(fallback_.predict("", window_id), state, kb_);
    out.low_information = true;
    out.timed_out = true;
    out.produced_ts_us = now_us();
    return out;
  }
  if (!response->contains("ranking") || !(*response)["ranking"].is_array())
    throw AdapterError("protocol adapter response for window " + std::to_string(window_id) + " lacks a ranking");
  RankedPrediction out;
  out.window_id = window_id;
  for (const auto& item : (*response)["ranking"]) {
    const auto pid = item.value("protocol_id", std::string{});
    const double c = item.value("confidence", -1.0);
    if (!kb_.is_protocol(pid) && !kb_.group_by_id(pid))
      throw AdapterError("protocol adapter returned unknown id '" + pid + "'");
    if (!(c >= 0.0 && c <= 1.0))
      throw AdapterError("protocol adapter returned confidence outside [0,1] for '" + pid + "'");
    out.entries.push_back({pid, c, c});
  }
  out = refine(std::move(out), state, kb_);
  out.produced_ts_us = now_us();
  return out;
}

}  // namespace emsrt::protocol
