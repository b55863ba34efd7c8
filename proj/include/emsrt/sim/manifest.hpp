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
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "emsrt/audio/transcriber.hpp"
#include "emsrt/vision/intervention.hpp"

namespace emsrt::sim {

// A scenario is one directory:
//
//   scenario.json
//     {"scenario_id": "...",
//      "audio": "audio.wav",                      RIFF/WAVE PCM16 mono 16 kHz
//      "frames_dir": "frames",                    optional
//      "transcript_alignment": [{"start_s", "end_s", "text"}],
//      "ground_truth_protocols": ["<protocol id>", ...],
//      "ground_truth_interventions": [{"start_s", "end_s", "label"}],
//      "patient_age": N | null}
//   <frames_dir>/frames.csv   header "frame_id,timestamp_s,filename", one row per frame
//   <frames_dir>/<filename>   encoded image bytes

inline constexpr const char* kManifestFile = "scenario.json";
inline constexpr const char* kFramesIndexFile = "frames.csv";

struct FrameEntry {
  std::uint32_t frame_id = 0;
  double timestamp_s = 0;
  std::string filename;
};

struct ScenarioManifest {
  std::string scenario_id;
  std::filesystem::path dir;
  std::filesystem::path audio_path;   // absolute or relative to the working directory
  std::filesystem::path frames_dir;   // empty when the scenario has no video
  std::vector<FrameEntry> frames;
  std::vector<audio::AlignedText> transcript_alignment;
  std::vector<std::string> ground_truth_protocols;
  std::vector<vision::TimedLabel> ground_truth_interventions;
  std::optional<long> patient_age;
};

struct Violation {
  std::string field;
  std::string rule;

  friend bool operator==(const Violation&, const Violation&) = default;
};

/// Parses the manifest and its frame index. Throws ManifestError when a file
/// cannot be read or a field has the wrong type; semantic rules are left to
/// validate_manifest().
ScenarioManifest load_manifest(const std::filesystem::path& dir);

ScenarioManifest manifest_from_json(const nlohmann::json& doc, const std::filesystem::path& dir);
nlohmann::json manifest_to_json(const ScenarioManifest& manifest);

/// Every broken invariant; empty iff the manifest is well formed.
std::vector<Violation> validate_manifest(const ScenarioManifest& manifest);

/// Frame bytes for an index entry. Throws ManifestError.
std::vector<std::uint8_t> read_frame(const ScenarioManifest& manifest, const FrameEntry& entry);

}  // namespace emsrt::sim
