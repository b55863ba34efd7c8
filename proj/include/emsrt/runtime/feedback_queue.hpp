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
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>

#include "emsrt/wire/feedback.hpp"

namespace emsrt::runtime {

struct EnqueueReceipt {
  std::uint64_t sequence = 0;  // global arrival order
  wire::FeedbackKind kind = wire::FeedbackKind::Protocol;
};

/// Feedback dispatch order: every queued protocol message before any
/// intervention message, FIFO within a kind. Unbounded; producers never block.
class FeedbackQueue {
 public:
  /// Throws Rejected once closed.
  EnqueueReceipt submit(wire::FeedbackMessage msg);

  /// Blocks until a message is available or the queue is closed and empty.
  std::optional<wire::FeedbackMessage> pop();
  std::optional<wire::FeedbackMessage> pop_for(std::chrono::milliseconds timeout);

  void close();
  bool closed() const;
  std::size_t size() const;

 private:
  std::optional<wire::FeedbackMessage> take();

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<wire::FeedbackMessage> protocol_;
  std::deque<wire::FeedbackMessage> intervention_;
  std::uint64_t next_sequence_ = 0;
  bool closed_ = false;
};

}  // namespace emsrt::runtime
