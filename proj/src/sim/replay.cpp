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

#include "emsrt/sim/replay.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <thread>

#include "emsrt/common/error.hpp"
#include "emsrt/sim/wav.hpp"

namespace emsrt::sim {
namespace {

using std::chrono::duration;
using std::chrono::duration_cast;
using std::chrono::microseconds;

Clock::duration scaled(double seconds, double speed) {
  return duration_cast<Clock::duration>(duration<double>(seconds / speed));
}

/// Sends a stream of datagrams on schedule, applying impairments.
template <typename SendFn>
struct ImpairedSender {
  Impairer impairer;
  SendFn send;
  std::optional<std::vector<std::uint8_t>> held;

  /// Returns false when the packet was dropped by the injector.
  bool offer(std::vector<std::uint8_t> datagram, std::uint64_t& reordered) {
    const auto d = impairer.next();
    if (d.jitter_ms > 0) std::this_thread::sleep_for(duration<double, std::milli>(d.jitter_ms));
    if (d.drop) return false;
    if (d.reorder && !held) {
      held = std::move(datagram);
      ++reordered;
      return true;
    }
    send(datagram);
    if (held) {
      send(*held);
      held.reset();
    }
    return true;
  }

  void flush() {
    if (held) {
      send(*held);
      held.reset();
    }
  }
};

}  // namespace

void validate_impairment(const ImpairmentProfile& p) {
  if (!(p.loss_prob >= 0.0 && p.loss_prob <= 1.0)) throw ConfigError("loss", "must be within [0, 1]");
  if (!(p.reorder_prob >= 0.0 && p.reorder_prob <= 1.0)) throw ConfigError("reorder", "must be within [0, 1]");
  if (!(p.jitter_ms >= 0.0) || !std::isfinite(p.jitter_ms)) throw ConfigError("jitter_ms", "must be >= 0");
}

Impairer::Impairer(const ImpairmentProfile& profile, Channel channel)
    : profile_(profile), rng_(splitmix64(profile.seed ^ splitmix64(static_cast<std::uint64_t>(channel)))) {
  validate_impairment(profile);
}

ImpairmentDecision Impairer::next() {
  const double loss = rng_.uniform();
  const double reorder = rng_.uniform();
  const double jitter = rng_.uniform();
  return {loss < profile_.loss_prob, reorder < profile_.reorder_prob, jitter * profile_.jitter_ms};
}

UdpSink::UdpSink(const std::string& host, std::uint16_t audio_port, std::uint16_t video_port)
    : audio_(host, audio_port), video_(host, video_port) {}

bool DirectSink::send_audio(std::span<const std::uint8_t> datagram) {
  ingestor_.on_audio_datagram(datagram);
  return true;
}

bool DirectSink::send_video(std::span<const std::uint8_t> datagram) {
  const auto now = Clock::now();
  ingestor_.on_video_datagram(datagram, now);
  ingestor_.tick(now);
  return true;
}

void DirectSink::finish() {
  ingestor_.close_audio();
  ingestor_.close_video();
}

nlohmann::json report_to_json(const ReplayReport& r) {
  return {{"scenario_id", r.scenario_id},
          {"audio_packets", r.audio_packets},
          {"audio_sent", r.audio_sent},
          {"audio_dropped", r.audio_dropped},
          {"audio_reordered", r.audio_reordered},
          {"audio_send_failures", r.audio_send_failures},
          {"dropped_audio_seqs", r.dropped_audio_seqs},
          {"video_frames", r.video_frames},
          {"video_fragments", r.video_fragments},
          {"video_fragments_sent", r.video_fragments_sent},
          {"video_fragments_dropped", r.video_fragments_dropped},
          {"video_send_failures", r.video_send_failures},
          {"wall_duration_s", r.wall_duration_s}};
}

std::vector<wire::AudioPacket> packetize(const std::vector<std::int16_t>& samples) {
  std::vector<wire::AudioPacket> out;
  const std::size_t n = (samples.size() + wire::kSamplesPerPacket - 1) / wire::kSamplesPerPacket;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    wire::AudioPacket p;
    p.seq = static_cast<std::uint32_t>(k);
    p.capture_ts_us = wire::samples_to_us(k * wire::kSamplesPerPacket);
    p.samples.assign(wire::kSamplesPerPacket, 0);
    const std::size_t begin = k * wire::kSamplesPerPacket;
    const std::size_t len = std::min<std::size_t>(wire::kSamplesPerPacket, samples.size() - begin);
    std::copy_n(samples.begin() + static_cast<std::ptrdiff_t>(begin), len, p.samples.begin());
    out.push_back(std::move(p));
  }
  return out;
}

ReplayReport replay_scenario(const ScenarioManifest& manifest, PacketSink& sink, const ImpairmentProfile& impairment,
                             const ReplayOptions& options) {
  validate_impairment(impairment);
  if (!(options.speed > 0.0) || !std::isfinite(options.speed)) throw ConfigError("speed", "must be > 0");

  const auto packets = packetize(read_wav(manifest.audio_path));
  std::vector<std::vector<std::uint8_t>> frames;
  frames.reserve(manifest.frames.size());
  for (const auto& f : manifest.frames) frames.push_back(read_frame(manifest, f));

  ReplayReport report;
  report.scenario_id = manifest.scenario_id;
  report.audio_packets = packets.size();
  report.video_frames = frames.size();

  const auto start = Clock::now();
  auto wait_until = [&](Clock::time_point t) {
    if (options.paced) std::this_thread::sleep_until(t);
  };
  const double packet_s = static_cast<double>(wire::kPacketDuration.count()) / 1e6;

  std::thread video([&] {
    auto send = [&](const std::vector<std::uint8_t>& d) {
      if (sink.send_video(d)) ++report.video_fragments_sent;
      else ++report.video_send_failures;
    };
    ImpairedSender<decltype(send)> sender{Impairer(impairment, Impairer::Channel::Video), send, {}};
    std::uint64_t reordered = 0;
    for (std::size_t i = 0; i < frames.size(); ++i) {
      const auto& entry = manifest.frames[i];
      wait_until(start + scaled(entry.timestamp_s, options.speed));
      const auto ts = static_cast<std::uint64_t>(std::llround(entry.timestamp_s * 1e6));
      for (const auto& frag : wire::fragment_frame(entry.frame_id, ts, frames[i])) {
        ++report.video_fragments;
        if (!sender.offer(wire::encode_video_fragment(frag), reordered)) ++report.video_fragments_dropped;
      }
    }
    sender.flush();
  });

  {
    auto send = [&](const std::vector<std::uint8_t>& d) {
      if (sink.send_audio(d)) {
        ++report.audio_sent;
        report.audio_send_offsets_us.push_back(
            duration_cast<microseconds>(Clock::now() - start).count());
      } else {
        ++report.audio_send_failures;
      }
    };
    ImpairedSender<decltype(send)> sender{Impairer(impairment, Impairer::Channel::Audio), send, {}};
    for (std::size_t k = 0; k < packets.size(); ++k) {
      wait_until(start + scaled(static_cast<double>(k) * packet_s, options.speed));
      const auto& p = packets[k];
      if (!sender.offer(wire::encode_audio_packet(p.seq, p.capture_ts_us, p.samples), report.audio_reordered)) {
        ++report.audio_dropped;
        report.dropped_audio_seqs.push_back(p.seq);
      }
    }
    sender.flush();
    wait_until(start + scaled(static_cast<double>(packets.size()) * packet_s, options.speed));
  }
  video.join();
  report.wall_duration_s = duration<double>(Clock::now() - start).count();
  return report;
}

std::vector<ReplayReport> replay_batch(const std::vector<ScenarioManifest>& manifests, PacketSink& sink,
                                       const ImpairmentProfile& impairment, const ReplayOptions& options) {
  std::vector<ReplayReport> out;
  out.reserve(manifests.size());
  for (const auto& m : manifests) out.push_back(replay_scenario(m, sink, impairment, options));
  return out;
}

}  // namespace emsrt::sim
