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

#include "emsrt/wire/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "emsrt/common/error.hpp"

namespace emsrt::wire {

void SocketFd::reset(int fd) {
  if (fd_ >= 0) ::close(fd_);
  fd_ = fd;
}

sockaddr_in resolve_ipv4(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (host.empty() || host == "0.0.0.0") {
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    return addr;
  }
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) == 1) return addr;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr) {
    throw StartupError("cannot resolve host '" + host + "'");
  }
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  ::freeaddrinfo(res);
  return addr;
}

namespace {

SocketFd make_bound(int type, const std::string& host, std::uint16_t port, const char* what) {
  SocketFd sock(::socket(AF_INET, type | SOCK_CLOEXEC, 0));
  if (!sock) throw StartupError(std::string(what) + ": socket() failed");
  if (type == SOCK_STREAM) {
    int one = 1;
    ::setsockopt(sock.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  } else {
    int buf = 4 << 20;
    ::setsockopt(sock.get(), SOL_SOCKET, SO_RCVBUF, &buf, sizeof buf);
  }
  const auto addr = resolve_ipv4(host, port);
  if (::bind(sock.get(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
    throw StartupError(std::string(what) + ": cannot bind " + host + ":" + std::to_string(port) +
                       ": " + std::strerror(errno));
  }
  return sock;
}

}  // namespace

SocketFd bind_udp(const std::string& host, std::uint16_t port) {
  return make_bound(SOCK_DGRAM, host, port, "udp");
}

SocketFd listen_tcp(const std::string& host, std::uint16_t port) {
  auto sock = make_bound(SOCK_STREAM, host, port, "tcp");
  if (::listen(sock.get(), 16) != 0) {
    throw StartupError("tcp: listen() failed: " + std::string(std::strerror(errno)));
  }
  return sock;
}

std::uint16_t local_port(const SocketFd& sock) {
  sockaddr_in addr{};
  socklen_t len = sizeof addr;
  ::getsockname(sock.get(), reinterpret_cast<sockaddr*>(&addr), &len);
  return ntohs(addr.sin_port);
}

SocketFd connect_tcp(const std::string& host, std::uint16_t port) {
  SocketFd sock(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!sock) throw StartupError("tcp: socket() failed");
  const auto addr = resolve_ipv4(host, port);
  if (::connect(sock.get(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
    throw StartupError("tcp: cannot connect to " + host + ":" + std::to_string(port) + ": " +
                       std::strerror(errno));
  }
  return sock;
}

UdpSender::UdpSender(const std::string& host, std::uint16_t port)
    : sock_(::socket(AF_INET, SOCK_DGRAM | SOCK_CLOEXEC, 0)), dest_(resolve_ipv4(host, port)) {
  if (!sock_) throw StartupError("udp: socket() failed");
  int buf = 4 << 20;
  ::setsockopt(sock_.get(), SOL_SOCKET, SO_SNDBUF, &buf, sizeof buf);
}

bool UdpSender::send(std::span<const std::uint8_t> datagram) {
  for (;;) {
    const ssize_t n = ::sendto(sock_.get(), datagram.data(), datagram.size(), 0,
                               reinterpret_cast<const sockaddr*>(&dest_), sizeof dest_);
    if (n >= 0) return true;
    if (errno == EINTR) continue;
    return false;
  }
}

bool send_all(int fd, std::span<const std::uint8_t> data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    off += static_cast<std::size_t>(n);
  }
  return true;
}

}  // namespace emsrt::wire
