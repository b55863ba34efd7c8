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
#include <cstdint>

namespace emsrt {

using Clock = std::chrono::steady_clock;

/// Microseconds on the process-wide monotonic clock. The epoch is fixed at
/// the first call, so values stay small and printable.
std::int64_t now_us();

/// Converts a monotonic time point to the same microsecond scale as now_us().
std::int64_t to_us(Clock::time_point tp);

}  // namespace emsrt
