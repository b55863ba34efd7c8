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

#include "emsrt/sim/manifest.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <set>

#include "emsrt/common/csv.hpp"
#include "emsrt/common/error.hpp"

namespace emsrt::sim {
namespace {

using nlohmann::json;

template <typename T>
T get(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ManifestError(where + ": missing '" + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ManifestError(where + ": '" + key + "' has the wrong type");
  }
}

const json& array_field(const json& doc, const char* key) {
  static const json empty = json::array();
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return empty;
  if (!it->is_array()) throw ManifestError(std::string("'") + key + "' must be an array");
  return *it;
}

std::vector<FrameEntry> read_frame_index(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ManifestError("cannot read frame index '" + file.string() + "'");
  std::vector<FrameEntry> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 || line.empty()) continue;
    auto f = csv::parse_line(line);
    if (f.size() != 3) throw ManifestError(file.string() + ":" + std::to_string(line_no) + ": expected 3 fields");
    try {
      out.push_back({static_cast<std::uint32_t>(std::stoul(f[0])), std::stod(f[1]), f[2]});
    } catch (const std::logic_error&) {
      throw ManifestError(file.string() + ":" + std::to_string(line_no) + ": bad number");
    }
  }
  return out;
}

}  // namespace

ScenarioManifest manifest_from_json(const json& doc, const std::filesystem::path& dir) {
  if (!doc.is_object()) throw ManifestError("manifest must be a JSON object");
  ScenarioManifest m;
  m.dir = dir;
  m.scenario_id = get<std::string>(doc, "scenario_id", "manifest");
  m.audio_path = dir / get<std::string>(doc, "audio", "manifest");
  if (doc.contains("frames_dir") && !doc["frames_dir"].is_null())
    m.frames_dir = dir / get<std::string>(doc, "frames_dir", "manifest");

  std::size_t i = 0;
  for (const auto& s : array_field(doc, "transcript_alignment")) {
    const auto where = "transcript_alignment[" + std::to_string(i++) + "]";
    m.transcript_alignment.push_back(
        {get<double>(s, "start_s", where), get<double>(s, "end_s", where), get<std::string>(s, "text", where)});
  }
  for (const auto& p : array_field(doc, "ground_truth_protocols")) {
    if (!p.is_string()) throw ManifestError("ground_truth_protocols must hold strings");
    m.ground_truth_protocols.push_back(p.get<std::string>());
  }
  i = 0;
  for (const auto& s : array_field(doc, "ground_truth_interventions")) {
    const auto where = "ground_truth_interventions[" + std::to_string(i++) + "]";
    m.ground_truth_interventions.push_back(
        {get<double>(s, "start_s", where), get<double>(s, "end_s", where), get<std::string>(s, "label", where)});
  }
  if (doc.contains("patient_age") && !doc["patient_age"].is_null()) {
    if (!doc["patient_age"].is_number_integer()) throw ManifestError("patient_age must be an integer or null");
    m.patient_age = doc["patient_age"].get<long>();
  }
  return m;
}

ScenarioManifest load_manifest(const std::filesystem::path& dir) {
  const auto file = dir / kManifestFile;
  std::ifstream in(file);
  if (!in) throw ManifestError("cannot read '" + file.string() + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ManifestError("'" + file.string() + "' is not valid JSON: " + e.what());
  }
  auto m = manifest_from_json(doc, dir);
  if (!m.frames_dir.empty()) m.frames = read_frame_index(m.frames_dir / kFramesIndexFile);
  return m;
}

json manifest_to_json(const ScenarioManifest& m) {
  json alignment = json::array();
  for (const auto& s : m.transcript_alignment)
    alignment.push_back({{"start_s", s.start_s}, {"end_s", s.end_s}, {"text", s.text}});
  json interventions = json::array();
  for (const auto& s : m.ground_truth_interventions)
    interventions.push_back({{"start_s", s.start_s}, {"end_s", s.end_s}, {"label", s.label}});
  json doc = {{"scenario_id", m.scenario_id},
              {"audio", std::filesystem::relative(m.audio_path, m.dir).generic_string()},
              {"transcript_alignment", alignment},
              {"ground_truth_protocols", m.ground_truth_protocols},
              {"ground_truth_interventions", interventions}};
  doc["frames_dir"] = m.frames_dir.empty() ? json(nullptr)
                                           : json(std::filesystem::relative(m.frames_dir, m.dir).generic_string());
  doc["patient_age"] = m.patient_age ? json(*m.patient_age) : json(nullptr);
  return doc;
}

std::vector<Violation> validate_manifest(const ScenarioManifest& m) {
  std::vector<Violation> v;
  if (m.scenario_id.empty()) v.push_back({"scenario_id", "must be non-empty"});

  std::error_code ec;
  if (!std::filesystem::is_regular_file(m.audio_path, ec)) v.push_back({"audio_path", "file does not exist"});

  for (std::size_t i = 0; i < m.transcript_alignment.size(); ++i) {
    const auto& s = m.transcript_alignment[i];
    const auto tag = "segment " + std::to_string(i);
    if (!(s.start_s >= 0.0 && s.end_s > s.start_s))
      v.push_back({"transcript_alignment", tag + ": needs 0 <= start_s < end_s"});
    if (i > 0 && s.start_s < m.transcript_alignment[i - 1].end_s)
      v.push_back({"transcript_alignment", tag + ": overlaps or precedes the previous segment"});
  }

  for (std::size_t i = 0; i < m.ground_truth_interventions.size(); ++i) {
    const auto& s = m.ground_truth_interventions[i];
    if (!(s.start_s >= 0.0 && s.end_s > s.start_s))
      v.push_back({"ground_truth_interventions", "interval " + std::to_string(i) + ": needs 0 <= start_s < end_s"});
    if (s.label.empty())
      v.push_back({"ground_truth_interventions", "interval " + std::to_string(i) + ": empty label"});
  }

  for (std::size_t i = 0; i < m.ground_truth_protocols.size(); ++i)
    if (m.ground_truth_protocols[i].empty())
      v.push_back({"ground_truth_protocols", "entry " + std::to_string(i) + ": empty label"});

  if (m.patient_age && *m.patient_age < 0) v.push_back({"patient_age", "must be >= 0"});

  std::set<std::uint32_t> ids;
  for (std::size_t i = 0; i < m.frames.size(); ++i) {
    const auto& f = m.frames[i];
    if (!ids.insert(f.frame_id).second)
      v.push_back({"frames", "frame " + std::to_string(f.frame_id) + ": duplicate frame_id"});
    if (!(f.timestamp_s >= 0.0)) v.push_back({"frames", "frame " + std::to_string(f.frame_id) + ": negative timestamp"});
    if (i > 0 && f.timestamp_s < m.frames[i - 1].timestamp_s)
      v.push_back({"frames", "frame " + std::to_string(f.frame_id) + ": timestamps not monotone"});
    if (!std::filesystem::is_regular_file(m.frames_dir / f.filename, ec))
      v.push_back({"frames", "frame " + std::to_string(f.frame_id) + ": file '" + f.filename + "' does not exist"});
  }
  return v;
}

std::vector<std::uint8_t> read_frame(const ScenarioManifest& m, const FrameEntry& entry) {
  const auto path = m.frames_dir / entry.filename;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ManifestError("cannot read frame '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace emsrt::sim
