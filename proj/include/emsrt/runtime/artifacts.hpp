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

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "emsrt/audio/transcriber.hpp"
#include "emsrt/common/trace.hpp"
#include "emsrt/protocol/ranking.hpp"
#include "emsrt/vision/intervention.hpp"
#include "emsrt/wire/feedback.hpp"

namespace emsrt::runtime {

// Run directory layout. Files marked (stable) contain no wall-clock values and
// are byte-identical across runs with the same inputs and seeds.
//
//   transcripts.txt    (stable) window_id<TAB>timed_out<TAB>text
//   predictions.csv    (stable) window_id,rank,protocol_id,confidence,raw_score,low_information
//   interventions.csv  (stable) window_id,frame_id,capture_ts_us,protocol_id,label,score
//   summary.json       (stable) counters for the run
//   traces.csv         window_id followed by every LatencyTrace field in microseconds
//   feedback.jsonl     one sent feedback body per line plus "sent_ts_us"
//   slo.json           SloReport
//   run_info.json      configuration, clock offset and ingest counters
inline constexpr const char* kTranscriptsFile = "transcripts.txt";
inline constexpr const char* kPredictionsFile = "predictions.csv";
inline constexpr const char* kInterventionsFile = "interventions.csv";
inline constexpr const char* kSummaryFile = "summary.json";
inline constexpr const char* kTracesFile = "traces.csv";
inline constexpr const char* kFeedbackFile = "feedback.jsonl";
inline constexpr const char* kSloFile = "slo.json";
inline constexpr const char* kRunInfoFile = "run_info.json";

/// Append-only writers, flushed after every record. Thread-safe. With an
/// empty directory every call is a no-op.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path run_dir);

  void transcript(const audio::TranscriptSegment& segment);
  void prediction(const protocol::RankedPrediction& prediction);
  void interventions(const std::string& protocol_id, const std::vector<vision::InterventionPrediction>& predictions);
  void trace(const LatencyTrace& trace);
  void feedback(const wire::FeedbackMessage& msg, std::int64_t sent_ts_us);
  void json(const std::string& file, const nlohmann::json& doc);

  const std::filesystem::path& dir() const { return dir_; }
  bool enabled() const { return !dir_.empty(); }

 private:
  void append(std::ofstream& out, const std::string& line);

  std::filesystem::path dir_;
  std::mutex mu_;
  std::ofstream transcripts_, predictions_, interventions_, traces_, feedback_;
};

/// Fixed-point rendering used in every stable artifact.
std::string format_real(double value);

struct PredictionRow {
  std::uint32_t window_id = 0;
  std::uint32_t rank = 0;
  std::string protocol_id;
  double confidence = 0;
  double raw_score = 0;
  bool low_information = false;
};

struct InterventionRow {
  std::uint32_t window_id = 0;
  std::uint32_t frame_id = 0;
  std::uint64_t capture_ts_us = 0;
  std::string protocol_id;
  std::string label;
  double score = 0;
};

/// Rankings keyed by window id, each in rank order. Throws SchemaError.
std::map<std::uint32_t, std::vector<PredictionRow>> read_predictions(const std::filesystem::path& file);
std::vector<InterventionRow> read_interventions(const std::filesystem::path& file);
/// window id -> text
std::map<std::uint32_t, std::string> read_transcripts(const std::filesystem::path& file);
std::vector<LatencyTrace> read_traces(const std::filesystem::path& file);

}  // namespace emsrt::runtime
