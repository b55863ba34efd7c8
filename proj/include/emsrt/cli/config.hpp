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
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "emsrt/eval/evaluate.hpp"

namespace emsrt::cli {

/// Effective settings for run and eval. Every field has a JSON key of the same
/// name, an environment variable EMSRT_<KEY> and (except `kb_path`, which is
/// `--kb`) a flag --<key with dashes>.
struct RunConfig {
  std::string bind_host = "127.0.0.1";
  std::int64_t audio_port = 47000;
  std::int64_t video_port = 47001;
  std::int64_t feedback_port = 47002;

  std::int64_t window_samples = audio::kDefaultWindowSamples;
  double gate_threshold = vision::kDefaultGateThreshold;
  std::int64_t slo_target_us = runtime::kDefaultSloTargetUs;
  bool flush_partial_window = false;
  std::int64_t frame_wait_ms = 250;

  std::string asr = "replay";
  std::string asr_endpoint;
  std::int64_t asr_timeout_ms = 3500;
  std::int64_t asr_delay_ms = 0;
  std::string protocol = "builtin";
  std::string protocol_endpoint;
  std::int64_t protocol_timeout_ms = 3500;
  double scorer_slope = 4.0;
  double scorer_offset = 0.5;
  std::string vision = "oracle";
  std::string vision_endpoint;
  std::int64_t vision_timeout_ms = 1000;
  double oracle_epsilon = 0.0;
  std::string oracle_confusion = "candidate";
  std::int64_t seed = 0;

  std::string kb_path;
  std::string run_dir = "runs/latest";
  std::int64_t idle_timeout_ms = 3000;
  double max_duration_s = 0;  // 0 = until idle
  std::string text_profile = "standard";
  double replay_speed = 8.0;
  bool parallel = false;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Shipped knowledge base used when kb_path is empty.
std::string default_kb_path();

enum class KeyType { String, Integer, Real, Boolean };

struct ConfigKey {
  const char* key;
  KeyType type;
  const char* help;
};

/// Every key, in declaration order.
const std::vector<ConfigKey>& config_keys();

/// "gate_threshold" -> "--gate-threshold"; "kb_path" -> "--kb".
std::string flag_for(const std::string& key);
/// "gate_threshold" -> "EMSRT_GATE_THRESHOLD".
std::string env_for(const std::string& key);

nlohmann::json config_to_json(const RunConfig& config);

/// Validates types, ranges and choices. Unknown keys are rejected. Missing
/// keys keep their defaults. Throws ConfigError naming the field.
RunConfig config_from_json(const nlohmann::json& doc);

/// Layers, lowest first: defaults, `file` (if given), environment, `flags`
/// (key -> raw text from the command line).
RunConfig parse_config(const std::map<std::string, std::string>& flags,
                       const std::optional<std::filesystem::path>& file,
                       const std::map<std::string, std::string>& env);

/// EMSRT_* variables of the current process that name config keys.
std::map<std::string, std::string> environment_overrides();

/// Conversions to library settings.
runtime::PipelineConfig pipeline_config(const RunConfig& config);
runtime::StageSelection stage_selection(const RunConfig& config);
eval::EvalConfig eval_config(const RunConfig& config);

}  // namespace emsrt::cli
