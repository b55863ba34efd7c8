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

#include "emsrt/sim/manifest.hpp"

namespace emsrt::sim {

inline constexpr const char* kChestPainProtocol = "medical - chest pain - cardiac suspected (protocol 2 - 1)";
inline constexpr const char* kRespiratoryProtocol =
    "medical - respiratory distress/asthma/copd/croup/reactive airway (respiratory distress)";

enum class SynthKind { Cardiac, Respiratory };

/// A scripted incident written to disk as a scenario directory. Narration is
/// one utterance per 4-second block; ground-truth interventions cover whole
/// blocks from the second block on, cycling through the protocol's labels.
struct SynthSpec {
  std::string scenario_id;
  SynthKind kind = SynthKind::Cardiac;
  int duration_s = 60;  // rounded up to a multiple of 4
  double fps = 5.0;
  std::optional<long> patient_age;
  std::uint64_t seed = 0;
};

ScenarioManifest write_synthetic_scenario(const std::filesystem::path& dir, const SynthSpec& spec);

/// Four cardiac and four respiratory incidents.
std::vector<SynthSpec> reference_specs(std::uint64_t seed = 7, int duration_s = 60);

/// Writes reference_specs() under out_dir, one subdirectory each; returns the directories.
std::vector<std::filesystem::path> write_reference_scenarios(const std::filesystem::path& out_dir,
                                                             std::uint64_t seed = 7, int duration_s = 60);

}  // namespace emsrt::sim
