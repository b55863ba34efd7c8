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

#include "emsrt/runtime/feedback_queue.hpp"

#include "emsrt/common/error.hpp"

namespace emsrt::runtime {

EnqueueReceipt FeedbackQueue::submit(wire::FeedbackMessage msg) {
  EnqueueReceipt receipt;
  {
    std::lock_guard lock(mu_);
    if (closed_) throw Rejected("feedback queue is closed");
    receipt = {next_sequence_++, msg.kind};
    (msg.kind == wire::FeedbackKind::Protocol ? protocol_ : intervention_).push_back(std::move(msg));
  }
  cv_.notify_one();
  return receipt;
}

std::optional<wire::FeedbackMessage> FeedbackQueue::take() {
  auto& q = !protocol_.empty() ? protocol_ : intervention_;
  if (q.empty()) return std::nullopt;
  auto msg = std::move(q.front());
  q.pop_front();
  return msg;
}

std::optional<wire::FeedbackMessage> FeedbackQueue::pop() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return closed_ || !protocol_.empty() || !intervention_.empty(); });
  return take();
}

std::optional<wire::FeedbackMessage> FeedbackQueue::pop_for(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return closed_ || !protocol_.empty() || !intervention_.empty(); });
  return take();
}

void FeedbackQueue::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool FeedbackQueue::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

std::size_t FeedbackQueue::size() const {
  std::lock_guard lock(mu_);
  return protocol_.size() + intervention_.size();
}

}  // namespace emsrt::runtime
