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
#include <cstdint>
#include <string>
#include <vector>

#include "emsrt/runtime/pipeline.hpp"

namespace emsrt::runtime {

/// Which implementation backs each stage, and its parameters.
struct StageSelection {
  std::string asr = "replay";  // replay | null | adapter
  std::string asr_endpoint;    // "exec:<command>" or "unix:<path>"
  std::chrono::milliseconds asr_timeout = audio::kDefaultAdapterTimeout;
  std::chrono::milliseconds asr_delay{0};  // added before every transcription

  std::string protocol = "builtin";  // builtin | adapter
  std::string protocol_endpoint;
  std::chrono::milliseconds protocol_timeout = audio::kDefaultAdapterTimeout;
  protocol::ScorerConfig scorer;

  std::string vision = "oracle";  // oracle | adapter | none
  std::string vision_endpoint;
  std::chrono::milliseconds vision_timeout{1000};
  double oracle_epsilon = 0.0;
  std::uint64_t oracle_seed = 0;
  vision::ConfusionModel oracle_confusion = vision::ConfusionModel::CandidateUniform;
};

/// Scenario ground truth that the replay transcriber and the oracle consume.
struct ScenarioTruth {
  std::vector<audio::AlignedText> alignment;
  vision::InterventionTimeline interventions;
};

/// Instantiates the selected stages. Adapters are started here. Throws
/// ConfigError for an unknown selection or a missing endpoint, AdapterError
/// when an adapter cannot be launched.
PipelineStages make_stages(const StageSelection& selection, const protocol::KnowledgeBase& kb,
                           const ScenarioTruth& truth);

vision::ConfusionModel parse_confusion(const std::string& name);
std::string to_string(vision::ConfusionModel model);

}  // namespace emsrt::runtime
