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

#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace emsrt::csv {

/// Quotes a field per RFC 4180 when it contains a separator, quote or
/// leading/trailing space. Embedded newlines are replaced by spaces since the
/// files written here are line-oriented.
std::string quote(std::string_view field);

std::string row(std::initializer_list<std::string_view> fields);
std::string row(const std::vector<std::string>& fields);

/// Splits one line into fields. Handles quoted fields with doubled quotes.
std::vector<std::string> parse_line(std::string_view line);

}  // namespace emsrt::csv
