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

#include "emsrt/sim/synth.hpp"

#include <cmath>
#include <fstream>

#include "emsrt/common/csv.hpp"
#include "emsrt/common/error.hpp"
#include "emsrt/common/rng.hpp"
#include "emsrt/sim/wav.hpp"
#include "emsrt/wire/packets.hpp"

namespace emsrt::sim {
namespace {

constexpr int kBlockSeconds = 4;
constexpr int kFrameWidth = 64;
constexpr int kFrameHeight = 48;

const std::vector<std::string> kCardiacScript = {
    "dispatch reports a {age} with chest pain",
    "patient states the chest pressure started an hour ago",
    "he is diaphoretic with pain radiating to the left arm",
    "placing him on the cardiac monitor and getting a 12 lead",
    "give aspirin now chewed",
    "attaching the defibrillator pads",
    "establishing iv access in the arm",
    "nitroglycerin under the tongue",
    "patient says the chest tightness is a little better",
    "reassessing after the nitroglycerin",
    "still some chest pain rated six",
    "preparing for transport",
    "monitor shows sinus rhythm",
    "second line going into the leg",
    "en route to the cardiac center",
};

const std::vector<std::string> kRespiratoryScript = {
    "we have a {age} with difficulty breathing",
    "history of asthma and she is wheezing",
    "accessory muscle use and worsening shortness of breath",
    "placing an oxygen mask on her face",
    "setting up the nebulizer with albuterol",
    "ipratropium added to the nebulizer",
    "inserting an airway adjunct",
    "breath sounds still show wheezing",
    "repeat albuterol treatment started",
    "she can speak in short sentences now",
    "continuing oxygen en route",
    "rechecking her breathing",
    "wheezing has decreased",
    "preparing for transport",
    "arriving at the emergency department",
};

const std::vector<std::string> kCardiacLabels = {"Attaching Defibrillator", "Inserting IV to arm",
                                                 "Inserting IV to leg", "Defibrillator"};
const std::vector<std::string> kRespiratoryLabels = {"Placing Oxygen mask on face", "Attaching nebulizer",
                                                     "Inserting airway adjunct", "Administering albuterol"};

std::string patient_phrase(const SynthSpec& spec) {
  const std::string who = spec.kind == SynthKind::Cardiac ? "male" : "female";
  if (!spec.patient_age) return "adult " + who;
  return std::to_string(*spec.patient_age) + " year old " + who;
}

std::string fill(std::string line, const std::string& phrase) {
  if (auto pos = line.find("{age}"); pos != std::string::npos) line.replace(pos, 5, phrase);
  return line;
}

std::vector<std::uint8_t> make_frame(std::uint32_t frame_id, Rng& rng) {
  const std::string header = "P5\n" + std::to_string(kFrameWidth) + " " + std::to_string(kFrameHeight) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (int y = 0; y < kFrameHeight; ++y)
    for (int x = 0; x < kFrameWidth; ++x)
      out.push_back(static_cast<std::uint8_t>((x * 3 + y * 2 + frame_id * 5 + rng.below(16)) & 0xFF));
  return out;
}

}  // namespace

ScenarioManifest write_synthetic_scenario(const std::filesystem::path& dir, const SynthSpec& spec) {
  if (spec.scenario_id.empty()) throw ConfigError("scenario_id", "must be non-empty");
  if (spec.duration_s <= 0) throw ConfigError("duration_s", "must be positive");
  if (!(spec.fps > 0.0)) throw ConfigError("fps", "must be positive");
  const int blocks = (spec.duration_s + kBlockSeconds - 1) / kBlockSeconds;
  const int duration = blocks * kBlockSeconds;

  std::filesystem::create_directories(dir / "frames");
  Rng rng(splitmix64(spec.seed));

  std::vector<std::int16_t> pcm(static_cast<std::size_t>(duration) * wire::kSampleRateHz);
  for (auto& s : pcm) s = static_cast<std::int16_t>(static_cast<int>(rng.below(601)) - 300);
  write_wav(dir / "audio.wav", pcm);

  ScenarioManifest m;
  m.scenario_id = spec.scenario_id;
  m.dir = dir;
  m.audio_path = dir / "audio.wav";
  m.frames_dir = dir / "frames";
  m.patient_age = spec.patient_age;

  const auto& script = spec.kind == SynthKind::Cardiac ? kCardiacScript : kRespiratoryScript;
  const auto& labels = spec.kind == SynthKind::Cardiac ? kCardiacLabels : kRespiratoryLabels;
  m.ground_truth_protocols = {spec.kind == SynthKind::Cardiac ? kChestPainProtocol : kRespiratoryProtocol};
  const auto phrase = patient_phrase(spec);
  for (int b = 0; b < blocks; ++b) {
    const double t0 = b * kBlockSeconds;
    m.transcript_alignment.push_back({t0 + 0.4, t0 + 3.6, fill(script[static_cast<std::size_t>(b) % script.size()], phrase)});
  }
  // Interventions span runs of three blocks starting at the second block.
  for (int b = 1, i = 0; b < blocks; b += 3, ++i) {
    const int end = std::min(blocks, b + 3);
    m.ground_truth_interventions.push_back({static_cast<double>(b * kBlockSeconds),
                                            static_cast<double>(end * kBlockSeconds),
                                            labels[static_cast<std::size_t>(i) % labels.size()]});
  }

  std::ofstream index(m.frames_dir / kFramesIndexFile, std::ios::trunc);
  index << "frame_id,timestamp_s,filename\n";
  const auto count = static_cast<std::uint32_t>(std::floor(duration * spec.fps - 1e-9)) + 1;
  for (std::uint32_t i = 0; i < count; ++i) {
    const double ts = static_cast<double>(i) / spec.fps;
    if (ts >= duration) break;
    char name[32];
    std::snprintf(name, sizeof name, "frame_%05u.pgm", i);
    const auto bytes = make_frame(i, rng);
    std::ofstream f(m.frames_dir / name, std::ios::binary | std::ios::trunc);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    char ts_text[32];
    std::snprintf(ts_text, sizeof ts_text, "%.6f", ts);
    index << csv::row({std::to_string(i), ts_text, name}) << '\n';
    m.frames.push_back({i, std::stod(ts_text), name});
  }
  if (!index) throw ManifestError("cannot write frame index in '" + m.frames_dir.string() + "'");

  std::ofstream out(dir / kManifestFile, std::ios::trunc);
  out << manifest_to_json(m).dump(2) << '\n';
  if (!out) throw ManifestError("cannot write manifest in '" + dir.string() + "'");
  return m;
}

std::vector<SynthSpec> reference_specs(std::uint64_t seed, int duration_s) {
  const long ages[] = {54, 67, 45, 71, 34, 62, 12, 29};
  std::vector<SynthSpec> out;
  for (int i = 0; i < 8; ++i) {
    SynthSpec s;
    s.kind = i < 4 ? SynthKind::Cardiac : SynthKind::Respiratory;
    s.scenario_id = (i < 4 ? "cardiac_" : "respiratory_") + std::to_string(i % 4 + 1);
    s.duration_s = duration_s;
    s.patient_age = ages[i];
    s.seed = splitmix64(seed + static_cast<std::uint64_t>(i));
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::filesystem::path> write_reference_scenarios(const std::filesystem::path& out_dir, std::uint64_t seed,
                                                             int duration_s) {
  std::vector<std::filesystem::path> dirs;
  for (const auto& spec : reference_specs(seed, duration_s)) {
    const auto dir = out_dir / spec.scenario_id;
    write_synthetic_scenario(dir, spec);
    dirs.push_back(dir);
  }
  return dirs;
}

}  // namespace emsrt::sim
