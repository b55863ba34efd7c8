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

#include <chrono>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

namespace emsrt {

/// Newline-delimited request/response transport to an external inference
/// engine. One request line out, zero or more response lines back.
class LineChannel {
 public:
  virtual ~LineChannel() = default;

  virtual void send_line(const std::string& line) = 0;

  /// Next complete line, or nullopt when `timeout` elapses first.
  /// Throws AdapterError if the peer has gone away.
  virtual std::optional<std::string> read_line(std::chrono::milliseconds timeout) = 0;
};

/// Opens a channel from an endpoint string:
///   "unix:/path/to.sock"   connect to a local stream socket
///   "exec:command args"    spawn `/bin/sh -c command` and talk over stdio
/// A bare string is treated as "exec:".
std::unique_ptr<LineChannel> open_line_channel(const std::string& endpoint);

/// JSON request/response on top of a LineChannel. Responses whose `key` does
/// not match the request (late answers to earlier, timed-out requests) are
/// discarded.
class JsonAdapterClient {
 public:
  explicit JsonAdapterClient(std::unique_ptr<LineChannel> channel) : channel_(std::move(channel)) {}

  std::optional<nlohmann::json> call(const nlohmann::json& request, const std::string& key,
                                     std::chrono::milliseconds timeout);

 private:
  std::unique_ptr<LineChannel> channel_;
};

/// Adapter protocol version carried in every request as "v".
inline constexpr int kAdapterProtocolVersion = 1;

}  // namespace emsrt
