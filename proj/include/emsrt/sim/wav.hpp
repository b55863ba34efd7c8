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

#include <cstdint>
#include <filesystem>
#include <vector>

namespace emsrt::sim {

/// Reads a RIFF/WAVE file holding 16-bit PCM, mono, 16 kHz. Throws
/// ManifestError for anything else.
std::vector<std::int16_t> read_wav(const std::filesystem::path& path);

void write_wav(const std::filesystem::path& path, const std::vector<std::int16_t>& samples);

}  // namespace emsrt::sim
