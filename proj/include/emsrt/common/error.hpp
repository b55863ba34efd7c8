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

#include <stdexcept>
#include <string>

namespace emsrt {

/// Root of every error raised by the library. `kind()` is the stable,
/// machine-readable name used in CLI error lines.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define EMSRT_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                     \
   public:                                                        \
    explicit Name(const std::string& what) : Error(#Name, what) {} \
  }

// wire
EMSRT_DEFINE_ERROR(EncodingError);
EMSRT_DEFINE_ERROR(MalformedPacket);
EMSRT_DEFINE_ERROR(FrameDropped);
EMSRT_DEFINE_ERROR(StartupError);
// simulator
EMSRT_DEFINE_ERROR(ManifestError);
// protocol stage
EMSRT_DEFINE_ERROR(SchemaError);
EMSRT_DEFINE_ERROR(DuplicateSegment);
// intervention stage
EMSRT_DEFINE_ERROR(UnknownProtocol);
EMSRT_DEFINE_ERROR(EmptyCandidates);
// runtime
EMSRT_DEFINE_ERROR(TraceError);
EMSRT_DEFINE_ERROR(Rejected);
EMSRT_DEFINE_ERROR(PipelineError);
// adapters
EMSRT_DEFINE_ERROR(AdapterError);

#undef EMSRT_DEFINE_ERROR

/// Configuration problem tied to a named field.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error("ConfigError", field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace emsrt
