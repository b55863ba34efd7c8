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

#include <optional>
#include <string>
#include <string_view>

namespace emsrt::audio {

/// Text normalization applied before scoring and error-rate computation.
///
///  Standard      lowercase; punctuation becomes whitespace except apostrophes
///                between two word characters; whitespace collapsed and trimmed.
///  LimitedVocab  Standard, but periods are kept and integers 0..9999 are
///                spelled out in English words ("120" -> "one hundred twenty").
///                A period between two digits reads as "point".
///
/// Bytes >= 0x80 (UTF-8 continuation/lead bytes) count as word characters.
/// Both profiles are idempotent.
enum class NormalizationProfile { Standard, LimitedVocab };

std::string normalize_text(std::string_view text, NormalizationProfile profile);

/// English words for 0..9999 without "and" or hyphens; nullopt otherwise.
std::optional<std::string> number_to_words(long value);

/// "standard" / "limited-vocab".
std::optional<NormalizationProfile> parse_profile(std::string_view name);
const char* to_string(NormalizationProfile profile);

}  // namespace emsrt::audio
