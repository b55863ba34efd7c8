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

#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

namespace emsrt::cli {

/// Exit statuses of the emsrt executable.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;   // bad flags, config file or environment
inline constexpr int kExitRuntime = 2;  // anything that failed after configuration

/// The emsrt command line. Errors are reported as one JSON object on `err`:
///   {"error": "<kind>", "message": "...", "field": "..."}  (field only for config errors)
class CommandLine {
 public:
  CommandLine(std::ostream& out, std::ostream& err);
  ~CommandLine();

  CommandLine(const CommandLine&) = delete;
  CommandLine& operator=(const CommandLine&) = delete;

  int run(int argc, const char* const* argv);

  /// Subcommand path (e.g. "metrics wer") -> every long flag it accepts.
  std::map<std::string, std::vector<std::string>> flags() const;

 private:
  struct State;
  std::unique_ptr<State> state_;
};

}  // namespace emsrt::cli
