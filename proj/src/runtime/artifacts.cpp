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

#include "emsrt/runtime/artifacts.hpp"

#include <cstdio>

#include "emsrt/common/csv.hpp"
#include "emsrt/common/error.hpp"

namespace emsrt::runtime {
namespace {

std::ofstream open_with_header(const std::filesystem::path& path, const std::string& header) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw PipelineError("cannot write '" + path.string() + "'");
  if (!header.empty()) out << header << '\n' << std::flush;
  return out;
}

std::string trace_header() {
  std::vector<std::string> cols{"window_id"};
  for (const auto& f : kAllTraceFields) cols.emplace_back(f.name);
  return csv::row(cols);
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& file, std::size_t columns) {
  std::ifstream in(file);
  if (!in) throw SchemaError("cannot read '" + file.string() + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    auto fields = csv::parse_line(line);
    if (fields.size() != columns)
      throw SchemaError("'" + file.string() + "': expected " + std::to_string(columns) + " fields in '" + line + "'");
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace

std::string format_real(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

ArtifactWriter::ArtifactWriter(std::filesystem::path run_dir) : dir_(std::move(run_dir)) {
  if (dir_.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw PipelineError("cannot create run directory '" + dir_.string() + "': " + ec.message());
  transcripts_ = open_with_header(dir_ / kTranscriptsFile, "");
  predictions_ = open_with_header(dir_ / kPredictionsFile,
                                  "window_id,rank,protocol_id,confidence,raw_score,low_information");
  interventions_ =
      open_with_header(dir_ / kInterventionsFile, "window_id,frame_id,capture_ts_us,protocol_id,label,score");
  traces_ = open_with_header(dir_ / kTracesFile, trace_header());
  feedback_ = open_with_header(dir_ / kFeedbackFile, "");
}

void ArtifactWriter::append(std::ofstream& out, const std::string& line) {
  out << line << '\n' << std::flush;
}

void ArtifactWriter::transcript(const audio::TranscriptSegment& segment) {
  if (!enabled()) return;
  std::string text = segment.text;
  for (char& c : text)
    if (c == '\n' || c == '\r' || c == '\t') c = ' ';
  std::lock_guard lock(mu_);
  append(transcripts_, std::to_string(segment.window_id) + '\t' + (segment.timed_out ? "1" : "0") + '\t' + text);
}

void ArtifactWriter::prediction(const protocol::RankedPrediction& prediction) {
  if (!enabled()) return;
  std::string block;
  for (std::size_t i = 0; i < prediction.entries.size(); ++i) {
    const auto& e = prediction.entries[i];
    if (i) block += '\n';
    block += csv::row({std::to_string(prediction.window_id), std::to_string(i + 1), e.protocol_id,
                       format_real(e.confidence), format_real(e.raw_score), prediction.low_information ? "1" : "0"});
  }
  if (block.empty()) return;
  std::lock_guard lock(mu_);
  append(predictions_, block);
}

void ArtifactWriter::interventions(const std::string& protocol_id,
                                   const std::vector<vision::InterventionPrediction>& predictions) {
  if (!enabled() || predictions.empty()) return;
  std::string block;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto& p = predictions[i];
    if (i) block += '\n';
    block += csv::row({std::to_string(p.window_id), std::to_string(p.frame_id), std::to_string(p.capture_ts_us),
                       protocol_id, p.label, format_real(p.score)});
  }
  std::lock_guard lock(mu_);
  append(interventions_, block);
}

void ArtifactWriter::trace(const LatencyTrace& trace) {
  if (!enabled()) return;
  std::vector<std::string> cols{std::to_string(trace.window_id)};
  for (const auto& f : kAllTraceFields) {
    const auto& v = trace.*(f.member);
    cols.push_back(v ? std::to_string(*v) : std::string{});
  }
  std::lock_guard lock(mu_);
  append(traces_, csv::row(cols));
}

void ArtifactWriter::feedback(const wire::FeedbackMessage& msg, std::int64_t sent_ts_us) {
  if (!enabled()) return;
  nlohmann::json j = {{"kind", wire::to_string(msg.kind)},
                      {"window_id", msg.window_id},
                      {"label", msg.label},
                      {"confidence", msg.confidence},
                      {"emitted_ts_us", msg.emitted_ts_us},
                      {"sent_ts_us", sent_ts_us}};
  std::lock_guard lock(mu_);
  append(feedback_, j.dump());
}

void ArtifactWriter::json(const std::string& file, const nlohmann::json& doc) {
  if (!enabled()) return;
  std::lock_guard lock(mu_);
  std::ofstream out(dir_ / file, std::ios::trunc);
  if (!out) throw PipelineError("cannot write '" + (dir_ / file).string() + "'");
  out << doc.dump(2) << '\n';
}

std::map<std::uint32_t, std::vector<PredictionRow>> read_predictions(const std::filesystem::path& file) {
  std::map<std::uint32_t, std::vector<PredictionRow>> out;
  try {
    for (auto& f : read_csv(file, 6)) {
      PredictionRow r{static_cast<std::uint32_t>(std::stoul(f[0])), static_cast<std::uint32_t>(std::stoul(f[1])),
                      f[2], std::stod(f[3]), std::stod(f[4]), f[5] == "1"};
      out[r.window_id].push_back(std::move(r));
    }
  } catch (const std::logic_error& e) {
    throw SchemaError("'" + file.string() + "': " + e.what());
  }
  return out;
}

std::vector<InterventionRow> read_interventions(const std::filesystem::path& file) {
  std::vector<InterventionRow> out;
  try {
    for (auto& f : read_csv(file, 6))
      out.push_back({static_cast<std::uint32_t>(std::stoul(f[0])), static_cast<std::uint32_t>(std::stoul(f[1])),
                     std::stoull(f[2]), f[3], f[4], std::stod(f[5])});
  } catch (const std::logic_error& e) {
    throw SchemaError("'" + file.string() + "': " + e.what());
  }
  return out;
}

std::map<std::uint32_t, std::string> read_transcripts(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw SchemaError("cannot read '" + file.string() + "'");
  std::map<std::uint32_t, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto a = line.find('\t');
    const auto b = a == std::string::npos ? a : line.find('\t', a + 1);
    if (b == std::string::npos) throw SchemaError("'" + file.string() + "': malformed line '" + line + "'");
    out[static_cast<std::uint32_t>(std::stoul(line.substr(0, a)))] = line.substr(b + 1);
  }
  return out;
}

std::vector<LatencyTrace> read_traces(const std::filesystem::path& file) {
  constexpr std::size_t kCols = 1 + std::size(kAllTraceFields);
  std::vector<LatencyTrace> out;
  try {
    for (auto& f : read_csv(file, kCols)) {
      LatencyTrace t;
      t.window_id = static_cast<std::uint32_t>(std::stoul(f[0]));
      for (std::size_t i = 0; i < std::size(kAllTraceFields); ++i)
        if (!f[i + 1].empty()) t.*(kAllTraceFields[i].member) = std::stoll(f[i + 1]);
      out.push_back(t);
    }
  } catch (const std::logic_error& e) {
    throw SchemaError("'" + file.string() + "': " + e.what());
  }
  return out;
}

}  // namespace emsrt::runtime
