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

#include "emsrt/audio/normalize.hpp"

#include <array>
#include <cctype>

namespace emsrt::audio {
namespace {

constexpr std::array<const char*, 20> kOnes = {
    "zero",    "one",     "two",       "three",    "four",     "five",    "six",
    "seven",   "eight",   "nine",      "ten",      "eleven",   "twelve",  "thirteen",
    "fourteen", "fifteen", "sixteen",  "seventeen", "eighteen", "nineteen"};
constexpr std::array<const char*, 10> kTens = {"",      "",      "twenty",  "thirty", "forty",
                                               "fifty", "sixty", "seventy", "eighty", "ninety"};

bool is_word_char(unsigned char c) { return std::isalnum(c) || c >= 0x80; }
bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }

std::string below_hundred(long v) {
  if (v < 20) return kOnes[static_cast<std::size_t>(v)];
  std::string out = kTens[static_cast<std::size_t>(v / 10)];
  if (v % 10) out += std::string(" ") + kOnes[static_cast<std::size_t>(v % 10)];
  return out;
}

// Collapses runs of whitespace into one space and trims both ends.
std::string collapse(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (unsigned char c : s) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += static_cast<char>(c);
  }
  return out;
}

std::string spell_numbers(const std::string& s) {
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!is_digit(static_cast<unsigned char>(s[i]))) {
      out += s[i++];
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && is_digit(static_cast<unsigned char>(s[j]))) ++j;
    const std::string digits = s.substr(i, j - i);
    std::optional<std::string> words;
    // Leading zeros are fine; anything longer than the 0..9999 range stays as digits.
    const auto first_nonzero = digits.find_first_not_of('0');
    const std::size_t significant = first_nonzero == std::string::npos ? 1 : digits.size() - first_nonzero;
    if (significant <= 4) words = number_to_words(std::stol(digits));
    if (!words) {
      out += digits;
    } else {
      if (!out.empty() && is_word_char(static_cast<unsigned char>(out.back()))) out += ' ';
      out += *words;
      if (j < s.size() && is_word_char(static_cast<unsigned char>(s[j]))) out += ' ';
    }
    i = j;
  }
  return out;
}

}  // namespace

std::optional<std::string> number_to_words(long v) {
  if (v < 0 || v > 9999) return std::nullopt;
  if (v < 100) return below_hundred(v);
  std::string out;
  if (v >= 1000) {
    out = std::string(kOnes[static_cast<std::size_t>(v / 1000)]) + " thousand";
    v %= 1000;
  }
  if (v >= 100) {
    if (!out.empty()) out += ' ';
    out += std::string(kOnes[static_cast<std::size_t>(v / 100)]) + " hundred";
    v %= 100;
  }
  if (v > 0) out += " " + below_hundred(v);
  return out;
}

std::string normalize_text(std::string_view text, NormalizationProfile profile) {
  const bool keep_periods = profile == NormalizationProfile::LimitedVocab;
  std::string lowered;
  lowered.reserve(text.size());
  for (unsigned char c : text) lowered += static_cast<char>(c < 0x80 ? std::tolower(c) : c);

  std::string cleaned;
  cleaned.reserve(lowered.size());
  for (std::size_t i = 0; i < lowered.size(); ++i) {
    const auto c = static_cast<unsigned char>(lowered[i]);
    const bool prev_word = i > 0 && is_word_char(static_cast<unsigned char>(lowered[i - 1]));
    const bool next_word = i + 1 < lowered.size() && is_word_char(static_cast<unsigned char>(lowered[i + 1]));
    if (is_word_char(c)) {
      cleaned += static_cast<char>(c);
    } else if (c == '\'' && prev_word && next_word) {
      cleaned += '\'';
    } else if (c == '.' && keep_periods) {
      const bool decimal = i > 0 && is_digit(static_cast<unsigned char>(lowered[i - 1])) &&
                           i + 1 < lowered.size() && is_digit(static_cast<unsigned char>(lowered[i + 1]));
      cleaned += decimal ? " point " : ".";
    } else {
      cleaned += ' ';
    }
  }
  if (keep_periods) cleaned = spell_numbers(cleaned);
  return collapse(cleaned);
}

std::optional<NormalizationProfile> parse_profile(std::string_view name) {
  if (name == "standard") return NormalizationProfile::Standard;
  if (name == "limited-vocab" || name == "limited_vocab") return NormalizationProfile::LimitedVocab;
  return std::nullopt;
}

const char* to_string(NormalizationProfile profile) {
  return profile == NormalizationProfile::Standard ? "standard" : "limited-vocab";
}

}  // namespace emsrt::audio
