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

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "emsrt/common/queues.hpp"
#include "emsrt/wire/feedback.hpp"
#include "emsrt/wire/net.hpp"
#include "emsrt/wire/packets.hpp"

namespace emsrt::wire {

using AudioQueue = BoundedQueue<AudioPacket>;
using FrameQueue = DropOldestQueue<VideoFrame>;

struct IngestStats {
  std::uint64_t audio_packets = 0;     // decoded and published
  std::uint64_t audio_malformed = 0;
  std::uint64_t audio_seq_gaps = 0;    // sequence numbers skipped over (lost)
  std::uint64_t audio_reordered = 0;   // arrived with seq <= highest seen
  std::uint64_t video_fragments = 0;
  std::uint64_t video_malformed = 0;
  std::uint64_t frames_completed = 0;
  std::uint64_t frames_dropped = 0;    // reassembly timeout
  std::uint64_t frames_evicted = 0;    // drop-oldest overflow downstream
  std::uint64_t feedback_clients = 0;  // currently connected
  std::uint64_t feedback_sent = 0;     // frames written, summed over clients
};

/// Decodes datagrams from both media channels and publishes them, in arrival
/// order, to the downstream queues. Transport-agnostic: the UDP gateway and
/// in-process senders both drive it.
class Ingestor {
 public:
  struct Options {
    std::size_t audio_queue_capacity = 1024;
    std::size_t frame_queue_capacity = 64;
    std::chrono::milliseconds reassembly_timeout{500};
  };

  Ingestor();
  explicit Ingestor(const Options& options);

  /// Blocks while the audio queue is full. Malformed datagrams are counted
  /// and discarded.
  void on_audio_datagram(std::span<const std::uint8_t> datagram);
  void on_video_datagram(std::span<const std::uint8_t> datagram, Clock::time_point now);

  /// Expires stale partial frames.
  void tick(Clock::time_point now);

  void close_audio() { audio_->close(); }
  void close_video() { frames_->close(); }

  std::shared_ptr<AudioQueue> audio_queue() const { return audio_; }
  std::shared_ptr<FrameQueue> frame_queue() const { return frames_; }

  IngestStats stats() const;

  /// Monotonic time of the most recent audio datagram, if any arrived.
  std::optional<Clock::time_point> last_audio_arrival() const;

 private:
  std::shared_ptr<AudioQueue> audio_;
  std::shared_ptr<FrameQueue> frames_;

  mutable std::mutex audio_mu_;
  std::optional<std::uint32_t> highest_seq_;
  std::optional<Clock::time_point> last_audio_;
  std::uint64_t audio_packets_ = 0, audio_malformed_ = 0, audio_gaps_ = 0, audio_reordered_ = 0;

  mutable std::mutex video_mu_;
  FrameReassembler reassembler_;
  std::uint64_t video_fragments_ = 0, video_malformed_ = 0;
};

struct GatewayConfig {
  std::string bind_host = "127.0.0.1";
  std::uint16_t audio_port = 0;     // 0 = ephemeral
  std::uint16_t video_port = 0;
  std::uint16_t feedback_port = 0;
  Ingestor::Options ingest;
  std::chrono::milliseconds feedback_send_timeout{2000};
};

/// UDP audio + UDP video listeners and the TCP feedback server.
///
/// Each listener runs on its own thread. publish_feedback() may be called
/// from any thread; stats() too.
class Gateway {
 public:
  /// Binds all three ports and starts the workers. Throws StartupError.
  explicit Gateway(const GatewayConfig& config);
  ~Gateway();

  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  std::uint16_t audio_port() const { return audio_port_; }
  std::uint16_t video_port() const { return video_port_; }
  std::uint16_t feedback_port() const { return feedback_port_; }

  Ingestor& ingestor() { return ingestor_; }

  /// Writes an encoded feedback frame to every connected client. Clients that
  /// fail to accept it are disconnected. Returns the number of clients served.
  std::size_t publish_feedback(std::span<const std::uint8_t> frame);

  /// Stops the UDP listeners and closes the downstream queues so consumers
  /// drain. The feedback server keeps running.
  void stop_ingest();

  /// Stops everything. Idempotent.
  void stop();

  IngestStats stats() const;

 private:
  void udp_loop(int fd, bool audio);
  void accept_loop();

  GatewayConfig config_;
  Ingestor ingestor_;
  SocketFd audio_sock_, video_sock_, listen_sock_;
  std::uint16_t audio_port_ = 0, video_port_ = 0, feedback_port_ = 0;

  std::atomic<bool> ingest_running_{true};
  std::atomic<bool> running_{true};
  std::thread audio_thread_, video_thread_, accept_thread_;

  mutable std::mutex clients_mu_;
  std::vector<SocketFd> clients_;
  std::uint64_t feedback_sent_ = 0;
};

/// Minimal feedback-channel client, as the glasses app would run it.
class FeedbackClient {
 public:
  FeedbackClient(const std::string& host, std::uint16_t port);

  /// Reads whatever arrives within `timeout` and returns completed messages.
  std::vector<FeedbackMessage> receive(std::chrono::milliseconds timeout);

  /// Reads exactly n raw bytes or fewer if the timeout expires first.
  std::vector<std::uint8_t> receive_bytes(std::size_t n, std::chrono::milliseconds timeout);

 private:
  SocketFd sock_;
  FeedbackStreamDecoder decoder_;
};

}  // namespace emsrt::wire
