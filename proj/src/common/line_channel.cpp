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

#include "emsrt/common/line_channel.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "emsrt/common/clock.hpp"
#include "emsrt/common/error.hpp"

extern char** environ;

namespace emsrt {
namespace {

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Fd& operator=(Fd&& o) noexcept {
    reset(std::exchange(o.fd_, -1));
    return *this;
  }
  ~Fd() { reset(); }
  int get() const { return fd_; }
  void reset(int fd = -1) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = fd;
  }

 private:
  int fd_ = -1;
};

void write_all(int fd, const std::string& data, bool is_socket) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = is_socket ? ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL)
                                : ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw AdapterError(std::string("adapter write failed: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

/// Shared buffered line reader over a readable fd.
class LineReader {
 public:
  std::optional<std::string> read_line(int fd, std::chrono::milliseconds timeout) {
    const auto deadline = Clock::now() + timeout;
    for (;;) {
      if (auto pos = buffer_.find('\n'); pos != std::string::npos) {
        std::string line = buffer_.substr(0, pos);
        buffer_.erase(0, pos + 1);
        return line;
      }
      const auto remaining =
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
      if (remaining.count() <= 0) return std::nullopt;
      pollfd pfd{fd, POLLIN, 0};
      const int rc = ::poll(&pfd, 1, static_cast<int>(remaining.count()));
      if (rc < 0) {
        if (errno == EINTR) continue;
        throw AdapterError(std::string("adapter poll failed: ") + std::strerror(errno));
      }
      if (rc == 0) return std::nullopt;
      char chunk[4096];
      const ssize_t n = ::read(fd, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        throw AdapterError(std::string("adapter read failed: ") + std::strerror(errno));
      }
      if (n == 0) throw AdapterError("adapter closed its output");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  std::string buffer_;
};

class SubprocessChannel final : public LineChannel {
 public:
  explicit SubprocessChannel(const std::string& command) {
    ::signal(SIGPIPE, SIG_IGN);
    int to_child[2];
    int from_child[2];
    if (::pipe2(to_child, O_CLOEXEC) != 0 || ::pipe2(from_child, O_CLOEXEC) != 0) {
      throw AdapterError("pipe() failed");
    }
    Fd child_in(to_child[0]);
    Fd child_out(from_child[1]);
    stdin_ = Fd(to_child[1]);
    stdout_ = Fd(from_child[0]);

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, child_in.get(), STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, child_out.get(), STDOUT_FILENO);
    std::string sh = "/bin/sh";
    std::string dash_c = "-c";
    std::string cmd = command;
    char* argv[] = {sh.data(), dash_c.data(), cmd.data(), nullptr};
    const int rc = ::posix_spawn(&pid_, "/bin/sh", &actions, nullptr, argv, environ);
    posix_spawn_file_actions_destroy(&actions);
    if (rc != 0) {
      throw AdapterError("failed to spawn adapter '" + command + "': " + std::strerror(rc));
    }
  }

  ~SubprocessChannel() override {
    stdin_.reset();
    if (pid_ > 0) {
      // Give the adapter a moment to exit on EOF before killing it.
      for (int i = 0; i < 20; ++i) {
        if (::waitpid(pid_, nullptr, WNOHANG) == pid_) return;
        ::usleep(5000);
      }
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, nullptr, 0);
    }
  }

  void send_line(const std::string& line) override { write_all(stdin_.get(), line + "\n", false); }

  std::optional<std::string> read_line(std::chrono::milliseconds timeout) override {
    return reader_.read_line(stdout_.get(), timeout);
  }

 private:
  pid_t pid_ = -1;
  Fd stdin_;
  Fd stdout_;
  LineReader reader_;
};

class UnixSocketChannel final : public LineChannel {
 public:
  explicit UnixSocketChannel(const std::string& path) {
    sockaddr_un addr{};
    if (path.size() >= sizeof addr.sun_path) throw AdapterError("socket path too long: " + path);
    addr.sun_family = AF_UNIX;
    std::memcpy(addr.sun_path, path.c_str(), path.size() + 1);
    sock_ = Fd(::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0));
    if (sock_.get() < 0) throw AdapterError("socket() failed");
    if (::connect(sock_.get(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
      throw AdapterError("cannot connect to adapter at " + path + ": " + std::strerror(errno));
    }
  }

  void send_line(const std::string& line) override { write_all(sock_.get(), line + "\n", true); }

  std::optional<std::string> read_line(std::chrono::milliseconds timeout) override {
    return reader_.read_line(sock_.get(), timeout);
  }

 private:
  Fd sock_;
  LineReader reader_;
};

}  // namespace

std::unique_ptr<LineChannel> open_line_channel(const std::string& endpoint) {
  if (endpoint.rfind("unix:", 0) == 0) {
    return std::make_unique<UnixSocketChannel>(endpoint.substr(5));
  }
  if (endpoint.rfind("exec:", 0) == 0) {
    return std::make_unique<SubprocessChannel>(endpoint.substr(5));
  }
  return std::make_unique<SubprocessChannel>(endpoint);
}

std::optional<nlohmann::json> JsonAdapterClient::call(const nlohmann::json& request,
                                                      const std::string& key,
                                                      std::chrono::milliseconds timeout) {
  channel_->send_line(request.dump());
  const auto deadline = Clock::now() + timeout;
  for (;;) {
    const auto remaining =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (remaining.count() <= 0) return std::nullopt;
    auto line = channel_->read_line(remaining);
    if (!line) return std::nullopt;
    auto response = nlohmann::json::parse(*line, nullptr, /*allow_exceptions=*/false);
    if (response.is_discarded() || !response.is_object()) continue;
    if (response.contains(key) && response[key] == request.at(key)) return response;
  }
}

}  // namespace emsrt
