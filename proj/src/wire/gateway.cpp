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

#include "emsrt/wire/gateway.hpp"

#include <poll.h>
#include <sys/socket.h>
#include <sys/time.h>

#include <algorithm>
#include <cerrno>

#include "emsrt/common/error.hpp"

namespace emsrt::wire {

Ingestor::Ingestor() : Ingestor(Options{}) {}

Ingestor::Ingestor(const Options& options)
    : audio_(std::make_shared<AudioQueue>(options.audio_queue_capacity)),
      frames_(std::make_shared<FrameQueue>(options.frame_queue_capacity)),
      reassembler_(options.reassembly_timeout) {}

void Ingestor::on_audio_datagram(std::span<const std::uint8_t> datagram) {
  AudioPacket pkt;
  {
    std::lock_guard lock(audio_mu_);
    last_audio_ = Clock::now();
    try {
      pkt = decode_audio_packet(datagram);
    } catch (const MalformedPacket&) {
      ++audio_malformed_;
      return;
    }
    if (highest_seq_ && pkt.seq <= *highest_seq_) {
      ++audio_reordered_;
    } else {
      if (highest_seq_) audio_gaps_ += pkt.seq - *highest_seq_ - 1;
      highest_seq_ = pkt.seq;
    }
    ++audio_packets_;
  }
  audio_->push(std::move(pkt));
}

void Ingestor::on_video_datagram(std::span<const std::uint8_t> datagram, Clock::time_point now) {
  std::optional<VideoFrame> frame;
  {
    std::lock_guard lock(video_mu_);
    VideoFragment frag;
    try {
      frag = decode_video_fragment(datagram);
    } catch (const MalformedPacket&) {
      ++video_malformed_;
      return;
    }
    ++video_fragments_;
    frame = reassembler_.offer(frag, now);
    reassembler_.expire(now);
  }
  if (frame) frames_->push(std::move(*frame));
}

void Ingestor::tick(Clock::time_point now) {
  std::lock_guard lock(video_mu_);
  reassembler_.expire(now);
}

IngestStats Ingestor::stats() const {
  IngestStats s;
  {
    std::lock_guard lock(audio_mu_);
    s.audio_packets = audio_packets_;
    s.audio_malformed = audio_malformed_;
    s.audio_seq_gaps = audio_gaps_;
    s.audio_reordered = audio_reordered_;
  }
  {
    std::lock_guard lock(video_mu_);
    s.video_fragments = video_fragments_;
    s.video_malformed = video_malformed_;
    s.frames_completed = reassembler_.completed();
    s.frames_dropped = reassembler_.dropped();
  }
  s.frames_evicted = frames_->dropped();
  return s;
}

std::optional<Clock::time_point> Ingestor::last_audio_arrival() const {
  std::lock_guard lock(audio_mu_);
  return last_audio_;
}

Gateway::Gateway(const GatewayConfig& config)
    : config_(config),
      ingestor_(config.ingest),
      audio_sock_(bind_udp(config.bind_host, config.audio_port)),
      video_sock_(bind_udp(config.bind_host, config.video_port)),
      listen_sock_(listen_tcp(config.bind_host, config.feedback_port)) {
  audio_port_ = local_port(audio_sock_);
  video_port_ = local_port(video_sock_);
  feedback_port_ = local_port(listen_sock_);
  audio_thread_ = std::thread([this] { udp_loop(audio_sock_.get(), true); });
  video_thread_ = std::thread([this] { udp_loop(video_sock_.get(), false); });
  accept_thread_ = std::thread([this] { accept_loop(); });
}

Gateway::~Gateway() { stop(); }

void Gateway::udp_loop(int fd, bool audio) {
  std::vector<std::uint8_t> buf(65536);
  while (ingest_running_.load()) {
    pollfd pfd{fd, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, 50);
    const auto now = Clock::now();
    if (!audio) ingestor_.tick(now);
    if (rc <= 0) continue;
    const ssize_t n = ::recv(fd, buf.data(), buf.size(), 0);
    if (n < 0) continue;
    const std::span<const std::uint8_t> datagram(buf.data(), static_cast<std::size_t>(n));
    if (audio) {
      ingestor_.on_audio_datagram(datagram);
    } else {
      ingestor_.on_video_datagram(datagram, now);
    }
  }
}

void Gateway::accept_loop() {
  while (running_.load()) {
    pollfd pfd{listen_sock_.get(), POLLIN, 0};
    if (::poll(&pfd, 1, 50) <= 0) continue;
    SocketFd client(::accept4(listen_sock_.get(), nullptr, nullptr, SOCK_CLOEXEC));
    if (!client) continue;
    timeval tv{};
    tv.tv_sec = config_.feedback_send_timeout.count() / 1000;
    tv.tv_usec = (config_.feedback_send_timeout.count() % 1000) * 1000;
    ::setsockopt(client.get(), SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
    std::lock_guard lock(clients_mu_);
    clients_.push_back(std::move(client));
  }
}

std::size_t Gateway::publish_feedback(std::span<const std::uint8_t> frame) {
  std::lock_guard lock(clients_mu_);
  std::size_t served = 0;
  for (auto it = clients_.begin(); it != clients_.end();) {
    if (send_all(it->get(), frame)) {
      ++served;
      ++it;
    } else {
      it = clients_.erase(it);
    }
  }
  feedback_sent_ += served;
  return served;
}

void Gateway::stop_ingest() {
  if (ingest_running_.exchange(false)) {
    if (audio_thread_.joinable()) audio_thread_.join();
    if (video_thread_.joinable()) video_thread_.join();
    ingestor_.close_audio();
    ingestor_.close_video();
  }
}

void Gateway::stop() {
  stop_ingest();
  if (running_.exchange(false)) {
    if (accept_thread_.joinable()) accept_thread_.join();
    std::lock_guard lock(clients_mu_);
    clients_.clear();
  }
}

IngestStats Gateway::stats() const {
  IngestStats s = ingestor_.stats();
  std::lock_guard lock(clients_mu_);
  s.feedback_clients = clients_.size();
  s.feedback_sent = feedback_sent_;
  return s;
}

FeedbackClient::FeedbackClient(const std::string& host, std::uint16_t port)
    : sock_(connect_tcp(host, port)) {}

std::vector<FeedbackMessage> FeedbackClient::receive(std::chrono::milliseconds timeout) {
  std::vector<FeedbackMessage> out;
  const auto deadline = Clock::now() + timeout;
  std::vector<std::uint8_t> buf(65536);
  for (;;) {
    const auto remaining =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
    if (remaining <= 0) break;
    pollfd pfd{sock_.get(), POLLIN, 0};
    if (::poll(&pfd, 1, static_cast<int>(remaining)) <= 0) break;
    const ssize_t n = ::recv(sock_.get(), buf.data(), buf.size(), 0);
    if (n <= 0) break;
    auto msgs = decoder_.feed(std::span<const std::uint8_t>(buf.data(), static_cast<std::size_t>(n)));
    out.insert(out.end(), std::make_move_iterator(msgs.begin()), std::make_move_iterator(msgs.end()));
  }
  return out;
}

std::vector<std::uint8_t> FeedbackClient::receive_bytes(std::size_t n,
                                                        std::chrono::milliseconds timeout) {
  std::vector<std::uint8_t> out;
  const auto deadline = Clock::now() + timeout;
  std::vector<std::uint8_t> buf(65536);
  while (out.size() < n) {
    const auto remaining =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
    if (remaining <= 0) break;
    pollfd pfd{sock_.get(), POLLIN, 0};
    if (::poll(&pfd, 1, static_cast<int>(remaining)) <= 0) break;
    const ssize_t got = ::recv(sock_.get(), buf.data(), std::min(buf.size(), n - out.size()), 0);
    if (got <= 0) break;
    out.insert(out.end(), buf.begin(), buf.begin() + got);
  }
  return out;
}

}  // namespace emsrt::wire
