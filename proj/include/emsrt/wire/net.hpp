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

#include <netinet/in.h>

#include <cstdint>
#include <span>
#include <string>
#include <utility>

namespace emsrt::wire {

/// Owning POSIX file descriptor.
class SocketFd {
 public:
  SocketFd() = default;
  explicit SocketFd(int fd) : fd_(fd) {}
  SocketFd(SocketFd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  SocketFd& operator=(SocketFd&& o) noexcept {
    reset(std::exchange(o.fd_, -1));
    return *this;
  }
  SocketFd(const SocketFd&) = delete;
  SocketFd& operator=(const SocketFd&) = delete;
  ~SocketFd() { reset(); }

  int get() const { return fd_; }
  explicit operator bool() const { return fd_ >= 0; }
  void reset(int fd = -1);

 private:
  int fd_ = -1;
};

/// IPv4 address lookup; throws StartupError when the host cannot be resolved.
sockaddr_in resolve_ipv4(const std::string& host, std::uint16_t port);

/// Binds a UDP socket; port 0 picks an ephemeral port. Throws StartupError.
SocketFd bind_udp(const std::string& host, std::uint16_t port);

/// Binds and listens on a TCP socket. Throws StartupError.
SocketFd listen_tcp(const std::string& host, std::uint16_t port);

std::uint16_t local_port(const SocketFd& sock);

/// Connects a TCP client socket. Throws StartupError.
SocketFd connect_tcp(const std::string& host, std::uint16_t port);

/// Unconnected UDP sender.
class UdpSender {
 public:
  UdpSender(const std::string& host, std::uint16_t port);

  /// False if the kernel refused the datagram (e.g. ICMP unreachable).
  bool send(std::span<const std::uint8_t> datagram);

 private:
  SocketFd sock_;
  sockaddr_in dest_{};
};

/// Writes the whole buffer; false if the peer is gone.
bool send_all(int fd, std::span<const std::uint8_t> data);

}  // namespace emsrt::wire
