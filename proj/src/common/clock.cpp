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

#include "emsrt/common/clock.hpp"

namespace emsrt {
namespace {

Clock::time_point process_epoch() {
  static const Clock::time_point epoch = Clock::now();
  return epoch;
}

}  // namespace

std::int64_t to_us(Clock::time_point tp) {
  return std::chrono::duration_cast<std::chrono::microseconds>(tp - process_epoch()).count();
}

std::int64_t now_us() { return to_us(Clock::now()); }

}  // namespace emsrt
