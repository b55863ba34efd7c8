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

#include <chrono>
#include <memory>
#include <string>

#include "emsrt/common/line_channel.hpp"
#include "emsrt/protocol/ranking.hpp"

namespace emsrt::protocol {

/// Protocol stage contract: accumulated incident state in, fine-grained
/// ranking over protocol ids out.
class ProtocolPredictor {
 public:
  virtual ~ProtocolPredictor() = default;
  virtual RankedPrediction predict(const IncidentState& state, std::uint32_t window_id) = 0;
  virtual std::string id() const = 0;
};

class BuiltinPredictor final : public ProtocolPredictor {
 public:
  BuiltinPredictor(const KnowledgeBase& kb, ScorerConfig config = {}) : kb_(kb), scorer_(kb, config) {}
  RankedPrediction predict(const IncidentState& state, std::uint32_t window_id) override;
  std::string id() const override { return "builtin"; }

 private:
  const KnowledgeBase& kb_;
  LexicalScorer scorer_;
};

/// External model over the line protocol:
///
///   request   {"v":1,"window_id":N,"text":"...","age":N|null}
///   response  {"window_id":N,"ranking":[{"protocol_id":"...","confidence":c},...]}
///
/// Ranking ids may be protocol or group ids; group ids are refined by age.
/// On timeout the stage emits the built-in empty-text ranking flagged
/// low_information and timed_out.
class AdapterPredictor final : public ProtocolPredictor {
 public:
  AdapterPredictor(const KnowledgeBase& kb, std::unique_ptr<LineChannel> channel, std::chrono::milliseconds timeout,
                   ScorerConfig fallback = {});
  RankedPrediction predict(const IncidentState& state, std::uint32_t window_id) override;
  std::string id() const override { return "adapter"; }

 private:
  const KnowledgeBase& kb_;
  JsonAdapterClient client_;
  std::chrono::milliseconds timeout_;
  LexicalScorer fallback_;
};

}  // namespace emsrt::protocol
