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
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "emsrt/common/rng.hpp"
#include "emsrt/sim/manifest.hpp"
#include "emsrt/wire/gateway.hpp"
#include "emsrt/wire/net.hpp"

namespace emsrt::sim {

struct ImpairmentProfile {
  double loss_prob = 0.0;
  double reorder_prob = 0.0;
  double jitter_ms = 0.0;  // upper bound of a uniform extra send delay
  std::uint64_t seed = 0;
};

/// Throws ConfigError naming the offending field.
void validate_impairment(const ImpairmentProfile& profile);

struct ImpairmentDecision {
  bool drop = false;
  bool reorder = false;  // hold this packet and send it after the next one
  double jitter_ms = 0;
};

/// Per-channel impairment stream. Every packet consumes exactly three draws
/// so the sequence of decisions depends only on (seed, channel, index).
class Impairer {
 public:
  enum class Channel : std::uint64_t { Audio = 1, Video = 2 };

  Impairer(const ImpairmentProfile& profile, Channel channel);
  ImpairmentDecision next();

 private:
  ImpairmentProfile profile_;
  Rng rng_;
};

/// Where replayed datagrams go. send_* are called from one thread per channel.
class PacketSink {
 public:
  virtual ~PacketSink() = default;
  /// False when the datagram could not be handed off.
  virtual bool send_audio(std::span<const std::uint8_t> datagram) = 0;
  virtual bool send_video(std::span<const std::uint8_t> datagram) = 0;
  /// Signals end of both streams.
  virtual void finish() {}
};

class UdpSink final : public PacketSink {
 public:
  UdpSink(const std::string& host, std::uint16_t audio_port, std::uint16_t video_port);
  bool send_audio(std::span<const std::uint8_t> datagram) override { return audio_.send(datagram); }
  bool send_video(std::span<const std::uint8_t> datagram) override { return video_.send(datagram); }

 private:
  wire::UdpSender audio_;
  wire::UdpSender video_;
};

/// Feeds an in-process Ingestor; finish() closes its queues.
class DirectSink final : public PacketSink {
 public:
  explicit DirectSink(wire::Ingestor& ingestor) : ingestor_(ingestor) {}
  bool send_audio(std::span<const std::uint8_t> datagram) override;
  bool send_video(std::span<const std::uint8_t> datagram) override;
  void finish() override;

 private:
  wire::Ingestor& ingestor_;
};

struct ReplayOptions {
  double speed = 1.0;  // 1.0 = real time
  bool paced = true;   // false sends as fast as the sink accepts
};

struct ReplayReport {
  std::string scenario_id;
  std::uint64_t audio_packets = 0;  // packets in the stream, including dropped ones
  std::uint64_t audio_sent = 0;
  std::uint64_t audio_dropped = 0;  // by the impairment injector
  std::uint64_t audio_reordered = 0;
  std::uint64_t audio_send_failures = 0;
  std::vector<std::uint32_t> dropped_audio_seqs;
  std::vector<std::int64_t> audio_send_offsets_us;  // per sent packet, from replay start
  std::uint64_t video_frames = 0;
  std::uint64_t video_fragments = 0;
  std::uint64_t video_fragments_sent = 0;
  std::uint64_t video_fragments_dropped = 0;
  std::uint64_t video_send_failures = 0;
  double wall_duration_s = 0;
};

nlohmann::json report_to_json(const ReplayReport& report);

/// Splits PCM into 1024-sample packets, zero-padding the last one.
std::vector<wire::AudioPacket> packetize(const std::vector<std::int16_t>& samples);

/// Streams the scenario's audio and frames into `sink`. Audio packet k leaves
/// at k * 64 ms / speed after the start; frame i at timestamp_s / speed. The
/// call returns once both channels are done and the nominal stream duration
/// has elapsed; it does not call sink.finish(). Throws ManifestError.
ReplayReport replay_scenario(const ScenarioManifest& manifest, PacketSink& sink, const ImpairmentProfile& impairment,
                             const ReplayOptions& options = {});

/// Replays each scenario in turn; one report per manifest.
std::vector<ReplayReport> replay_batch(const std::vector<ScenarioManifest>& manifests, PacketSink& sink,
                                       const ImpairmentProfile& impairment, const ReplayOptions& options = {});

}  // namespace emsrt::sim
