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

#include "emsrt/runtime/stages.hpp"

#include "emsrt/common/error.hpp"

namespace emsrt::runtime {
namespace {

std::unique_ptr<LineChannel> channel_for(const std::string& field, const std::string& endpoint) {
  if (endpoint.empty()) throw ConfigError(field, "an adapter endpoint is required");
  return open_line_channel(endpoint);
}

}  // namespace

vision::ConfusionModel parse_confusion(const std::string& name) {
  if (name == "candidate") return vision::ConfusionModel::CandidateUniform;
  if (name == "vocabulary") return vision::ConfusionModel::VocabularyUniform;
  throw ConfigError("oracle_confusion", "expected 'candidate' or 'vocabulary', got '" + name + "'");
}

std::string to_string(vision::ConfusionModel model) {
  return model == vision::ConfusionModel::CandidateUniform ? "candidate" : "vocabulary";
}

PipelineStages make_stages(const StageSelection& sel, const protocol::KnowledgeBase& kb, const ScenarioTruth& truth) {
  PipelineStages stages;

  if (sel.asr == "replay") {
    stages.transcriber = std::make_unique<audio::ReplayTranscriber>(truth.alignment);
  } else if (sel.asr == "null") {
    stages.transcriber = std::make_unique<audio::NullTranscriber>();
  } else if (sel.asr == "adapter") {
    stages.transcriber =
        std::make_unique<audio::AdapterTranscriber>(channel_for("asr_endpoint", sel.asr_endpoint), sel.asr_timeout);
  } else {
    throw ConfigError("asr", "expected replay, null or adapter, got '" + sel.asr + "'");
  }
  if (sel.asr_delay.count() > 0)
    stages.transcriber = std::make_unique<audio::DelayedTranscriber>(std::move(stages.transcriber), sel.asr_delay);

  if (sel.protocol == "builtin") {
    stages.predictor = std::make_unique<protocol::BuiltinPredictor>(kb, sel.scorer);
  } else if (sel.protocol == "adapter") {
    stages.predictor = std::make_unique<protocol::AdapterPredictor>(
        kb, channel_for("protocol_endpoint", sel.protocol_endpoint), sel.protocol_timeout, sel.scorer);
  } else {
    throw ConfigError("protocol", "expected builtin or adapter, got '" + sel.protocol + "'");
  }

  if (sel.vision == "oracle") {
    vision::OracleClassifier::Options o;
    o.epsilon = sel.oracle_epsilon;
    o.seed = sel.oracle_seed;
    o.model = sel.oracle_confusion;
    o.vocabulary = kb.intervention_vocabulary();
    stages.classifier = std::make_unique<vision::OracleClassifier>(truth.interventions, std::move(o));
  } else if (sel.vision == "adapter") {
    stages.classifier = std::make_unique<vision::AdapterClassifier>(
        channel_for("vision_endpoint", sel.vision_endpoint), sel.vision_timeout);
  } else if (sel.vision != "none") {
    throw ConfigError("vision", "expected oracle, adapter or none, got '" + sel.vision + "'");
  }
  return stages;
}

}  // namespace emsrt::runtime
