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

#include "emsrt/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>

#include "emsrt/common/error.hpp"

#ifndef EMSRT_REFERENCE_KB
#define EMSRT_REFERENCE_KB "data/reference_kb.json"
#endif

extern char** environ;

namespace emsrt::cli {
namespace {

using nlohmann::json;

// Binds each key to its RunConfig member so the JSON and struct views stay in step.
template <typename F>
void for_each_field(RunConfig& c, F&& f) {
  f("bind_host", c.bind_host);
  f("audio_port", c.audio_port);
  f("video_port", c.video_port);
  f("feedback_port", c.feedback_port);
  f("window_samples", c.window_samples);
  f("gate_threshold", c.gate_threshold);
  f("slo_target_us", c.slo_target_us);
  f("flush_partial_window", c.flush_partial_window);
  f("frame_wait_ms", c.frame_wait_ms);
  f("asr", c.asr);
  f("asr_endpoint", c.asr_endpoint);
  f("asr_timeout_ms", c.asr_timeout_ms);
  f("asr_delay_ms", c.asr_delay_ms);
  f("protocol", c.protocol);
  f("protocol_endpoint", c.protocol_endpoint);
  f("protocol_timeout_ms", c.protocol_timeout_ms);
  f("scorer_slope", c.scorer_slope);
  f("scorer_offset", c.scorer_offset);
  f("vision", c.vision);
  f("vision_endpoint", c.vision_endpoint);
  f("vision_timeout_ms", c.vision_timeout_ms);
  f("oracle_epsilon", c.oracle_epsilon);
  f("oracle_confusion", c.oracle_confusion);
  f("seed", c.seed);
  f("kb_path", c.kb_path);
  f("run_dir", c.run_dir);
  f("idle_timeout_ms", c.idle_timeout_ms);
  f("max_duration_s", c.max_duration_s);
  f("text_profile", c.text_profile);
  f("replay_speed", c.replay_speed);
  f("parallel", c.parallel);
}

void assign(const std::string& key, std::string& field, const json& v) {
  if (!v.is_string()) throw ConfigError(key, "expected a string");
  field = v.get<std::string>();
}

void assign(const std::string& key, std::int64_t& field, const json& v) {
  if (!v.is_number_integer()) throw ConfigError(key, "expected an integer");
  field = v.get<std::int64_t>();
}

void assign(const std::string& key, double& field, const json& v) {
  if (!v.is_number()) throw ConfigError(key, "expected a number");
  field = v.get<double>();
  if (!std::isfinite(field)) throw ConfigError(key, "must be finite");
}

void assign(const std::string& key, bool& field, const json& v) {
  if (!v.is_boolean()) throw ConfigError(key, "expected true or false");
  field = v.get<bool>();
}

KeyType type_of(const std::string&) { return KeyType::String; }
KeyType type_of(const std::int64_t&) { return KeyType::Integer; }
KeyType type_of(const double&) { return KeyType::Real; }
KeyType type_of(const bool&) { return KeyType::Boolean; }

/// Converts command-line or environment text to the JSON type the key expects.
json from_text(const std::string& key, KeyType type, const std::string& text) {
  switch (type) {
    case KeyType::String: return text;
    case KeyType::Boolean: {
      std::string t = text;
      std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
      if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
      if (t == "0" || t == "false" || t == "no" || t == "off") return false;
      throw ConfigError(key, "expected a boolean, got '" + text + "'");
    }
    case KeyType::Integer: {
      std::size_t used = 0;
      std::int64_t v = 0;
      try {
        v = std::stoll(text, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != text.size()) throw ConfigError(key, "expected an integer, got '" + text + "'");
      return v;
    }
    case KeyType::Real: {
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(text, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != text.size()) throw ConfigError(key, "expected a number, got '" + text + "'");
      return v;
    }
  }
  return text;
}

void check_choice(const std::string& key, const std::string& value, std::initializer_list<const char*> choices) {
  for (const char* c : choices)
    if (value == c) return;
  std::string list;
  for (const char* c : choices) list += (list.empty() ? "" : ", ") + std::string(c);
  throw ConfigError(key, "must be one of " + list + ", got '" + value + "'");
}

void validate(const RunConfig& c) {
  for (auto [key, port] : {std::pair{"audio_port", c.audio_port}, std::pair{"video_port", c.video_port},
                           std::pair{"feedback_port", c.feedback_port}})
    if (port < 0 || port > 65535) throw ConfigError(key, "must be within [0, 65535]");
  if (c.window_samples <= 0 || c.window_samples > (1 << 24)) throw ConfigError("window_samples", "must be in [1, 16777216]");
  if (!(c.gate_threshold >= 0.0 && c.gate_threshold <= 1.0)) throw ConfigError("gate_threshold", "must be within [0, 1]");
  if (c.slo_target_us <= 0) throw ConfigError("slo_target_us", "must be positive");
  if (c.frame_wait_ms < 0) throw ConfigError("frame_wait_ms", "must be >= 0");
  check_choice("asr", c.asr, {"replay", "null", "adapter"});
  check_choice("protocol", c.protocol, {"builtin", "adapter"});
  check_choice("vision", c.vision, {"oracle", "adapter", "none"});
  check_choice("oracle_confusion", c.oracle_confusion, {"candidate", "vocabulary"});
  check_choice("text_profile", c.text_profile, {"standard", "limited-vocab"});
  if (c.asr == "adapter" && c.asr_endpoint.empty()) throw ConfigError("asr_endpoint", "required when asr is adapter");
  if (c.protocol == "adapter" && c.protocol_endpoint.empty())
    throw ConfigError("protocol_endpoint", "required when protocol is adapter");
  if (c.vision == "adapter" && c.vision_endpoint.empty())
    throw ConfigError("vision_endpoint", "required when vision is adapter");
  for (auto [key, ms] : {std::pair{"asr_timeout_ms", c.asr_timeout_ms}, std::pair{"protocol_timeout_ms", c.protocol_timeout_ms},
                         std::pair{"vision_timeout_ms", c.vision_timeout_ms}})
    if (ms <= 0) throw ConfigError(key, "must be positive");
  if (c.asr_delay_ms < 0) throw ConfigError("asr_delay_ms", "must be >= 0");
  if (!(c.scorer_slope > 0.0)) throw ConfigError("scorer_slope", "must be positive");
  if (!(c.oracle_epsilon >= 0.0 && c.oracle_epsilon <= 1.0)) throw ConfigError("oracle_epsilon", "must be within [0, 1]");
  if (c.seed < 0) throw ConfigError("seed", "must be >= 0");
  if (c.idle_timeout_ms <= 0) throw ConfigError("idle_timeout_ms", "must be positive");
  if (!(c.max_duration_s >= 0.0)) throw ConfigError("max_duration_s", "must be >= 0");
  if (!(c.replay_speed > 0.0)) throw ConfigError("replay_speed", "must be positive");
}

const std::map<std::string, const char*> kHelp = {
    {"bind_host", "address the gateway binds"},
    {"audio_port", "UDP audio port (0 = ephemeral)"},
    {"video_port", "UDP video port (0 = ephemeral)"},
    {"feedback_port", "TCP feedback port (0 = ephemeral)"},
    {"window_samples", "samples per audio window (64000 = 4 s; 48000 for the legacy setting)"},
    {"gate_threshold", "minimum top protocol confidence for vision, in [0,1]"},
    {"slo_target_us", "protocol feedback latency objective in microseconds"},
    {"flush_partial_window", "emit the zero-padded trailing window at end of stream"},
    {"frame_wait_ms", "how long vision waits for a window's frames"},
    {"asr", "speech stage: replay | null | adapter"},
    {"asr_endpoint", "speech adapter endpoint (exec:CMD or unix:PATH)"},
    {"asr_timeout_ms", "speech adapter timeout"},
    {"asr_delay_ms", "artificial delay added to every transcription"},
    {"protocol", "protocol stage: builtin | adapter"},
    {"protocol_endpoint", "protocol adapter endpoint"},
    {"protocol_timeout_ms", "protocol adapter timeout"},
    {"scorer_slope", "sigmoid slope of the built-in scorer"},
    {"scorer_offset", "sigmoid offset of the built-in scorer"},
    {"vision", "vision stage: oracle | adapter | none"},
    {"vision_endpoint", "vision adapter endpoint"},
    {"vision_timeout_ms", "vision adapter timeout per frame"},
    {"oracle_epsilon", "oracle classifier noise rate in [0,1]"},
    {"oracle_confusion", "oracle wrong-answer model: candidate | vocabulary"},
    {"seed", "seed for the oracle classifier"},
    {"kb_path", "knowledge base file (default: shipped reference KB)"},
    {"run_dir", "directory for run artifacts"},
    {"idle_timeout_ms", "run: stop after this long without audio"},
    {"max_duration_s", "run: stop after this many seconds (0 = until idle)"},
    {"text_profile", "normalization for WER/CER: standard | limited-vocab"},
    {"replay_speed", "eval: replay speed multiplier"},
    {"parallel", "eval: run scenarios concurrently"},
};

}  // namespace

std::string default_kb_path() { return EMSRT_REFERENCE_KB; }

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    RunConfig c;
    for_each_field(c, [&](const char* key, auto& field) { out.push_back({key, type_of(field), kHelp.at(key)}); });
    return out;
  }();
  return keys;
}

std::string flag_for(const std::string& key) {
  if (key == "kb_path") return "--kb";
  std::string f = "--" + key;
  std::replace(f.begin(), f.end(), '_', '-');
  return f;
}

std::string env_for(const std::string& key) {
  std::string e = "EMSRT_" + key;
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::toupper(c); });
  return e;
}

json config_to_json(const RunConfig& config) {
  json j = json::object();
  RunConfig copy = config;
  for_each_field(copy, [&](const char* key, auto& field) { j[key] = field; });
  return j;
}

RunConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config", "expected a JSON object");
  RunConfig c;
  std::size_t known = 0;
  for_each_field(c, [&](const char* key, auto& field) {
    if (auto it = doc.find(key); it != doc.end()) {
      assign(key, field, *it);
      ++known;
    }
  });
  if (known != doc.size()) {
    for (const auto& [key, _] : doc.items()) {
      const auto& keys = config_keys();
      if (std::none_of(keys.begin(), keys.end(), [&](const ConfigKey& k) { return key == k.key; }))
        throw ConfigError(key, "unknown configuration key");
    }
  }
  validate(c);
  return c;
}

RunConfig parse_config(const std::map<std::string, std::string>& flags, const std::optional<std::filesystem::path>& file,
                       const std::map<std::string, std::string>& env) {
  json merged = config_to_json(RunConfig{});
  if (file) {
    std::ifstream in(*file);
    if (!in) throw ConfigError("config", "cannot read '" + file->string() + "'");
    json doc;
    try {
      in >> doc;
    } catch (const json::exception& e) {
      throw ConfigError("config", "'" + file->string() + "' is not valid JSON: " + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config", "'" + file->string() + "' must hold a JSON object");
    for (const auto& [key, value] : doc.items()) {
      if (!merged.contains(key)) throw ConfigError(key, "unknown configuration key");
      merged[key] = value;
    }
  }
  auto layer = [&](const std::map<std::string, std::string>& texts) {
    for (const auto& [key, text] : texts) {
      const auto& keys = config_keys();
      auto it = std::find_if(keys.begin(), keys.end(), [&](const ConfigKey& k) { return key == k.key; });
      if (it == keys.end()) throw ConfigError(key, "unknown configuration key");
      merged[key] = from_text(key, it->type, text);
    }
  };
  layer(env);
  layer(flags);
  return config_from_json(merged);
}

std::map<std::string, std::string> environment_overrides() {
  std::map<std::string, std::string> out;
  for (const auto& k : config_keys())
    if (const char* v = std::getenv(env_for(k.key).c_str())) out[k.key] = v;
  return out;
}

runtime::PipelineConfig pipeline_config(const RunConfig& c) {
  runtime::PipelineConfig p;
  p.window_samples = static_cast<std::uint32_t>(c.window_samples);
  p.gate_threshold = c.gate_threshold;
  p.slo_target_us = c.slo_target_us;
  p.flush_partial_window = c.flush_partial_window;
  p.frame_wait = std::chrono::milliseconds(c.frame_wait_ms);
  p.run_dir = c.run_dir;
  return p;
}

runtime::StageSelection stage_selection(const RunConfig& c) {
  runtime::StageSelection s;
  s.asr = c.asr;
  s.asr_endpoint = c.asr_endpoint;
  s.asr_timeout = std::chrono::milliseconds(c.asr_timeout_ms);
  s.asr_delay = std::chrono::milliseconds(c.asr_delay_ms);
  s.protocol = c.protocol;
  s.protocol_endpoint = c.protocol_endpoint;
  s.protocol_timeout = std::chrono::milliseconds(c.protocol_timeout_ms);
  s.scorer = {c.scorer_slope, c.scorer_offset};
  s.vision = c.vision;
  s.vision_endpoint = c.vision_endpoint;
  s.vision_timeout = std::chrono::milliseconds(c.vision_timeout_ms);
  s.oracle_epsilon = c.oracle_epsilon;
  s.oracle_seed = static_cast<std::uint64_t>(c.seed);
  s.oracle_confusion = runtime::parse_confusion(c.oracle_confusion);
  return s;
}

eval::EvalConfig eval_config(const RunConfig& c) {
  eval::EvalConfig e;
  e.pipeline = pipeline_config(c);
  e.stages = stage_selection(c);
  e.replay = {c.replay_speed, true};
  e.text_profile = audio::parse_profile(c.text_profile).value();
  e.parallel = c.parallel;
  return e;
}

}  // namespace emsrt::cli
