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
#include <string>
#include <vector>

#include "emsrt/common/rng.hpp"
#include "emsrt/protocol/knowledge_base.hpp"

namespace emsrt::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// The shipped reference knowledge base, loaded once.
const protocol::KnowledgeBase& reference_kb();

/// "exec:" endpoint for the fake adapter in the given mode.
std::string fake_adapter(const std::string& mode, const std::string& extra_args = "");

std::vector<std::int16_t> random_pcm(Rng& rng, std::size_t samples);

struct CommandResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

/// Runs the emsrt executable with shell-quoted arguments.
CommandResult run_emsrt(const std::vector<std::string>& args, const std::string& env_prefix = "");

void write_file(const std::filesystem::path& path, const std::string& text);
std::string read_file(const std::filesystem::path& path);

}  // namespace emsrt::testing
