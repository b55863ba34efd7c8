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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "emsrt/audio/normalize.hpp"

namespace emsrt::eval {

/// Unit-cost edit distance.
template <typename Seq>
std::size_t levenshtein(const Seq& a, const Seq& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::vector<std::string> tokenize(const std::string& text);

/// Unicode code points of UTF-8 text; invalid bytes map to themselves.
std::vector<std::uint32_t> code_points(const std::string& text);

/// Edits and reference length, for pooling over a corpus.
struct ErrorCounts {
  std::size_t edits = 0;
  std::size_t reference_length = 0;
  std::size_t hypothesis_length = 0;
  double rate() const;
};

ErrorCounts word_errors(const std::string& reference, const std::string& hypothesis,
                        audio::NormalizationProfile profile = audio::NormalizationProfile::Standard);
ErrorCounts char_errors(const std::string& reference, const std::string& hypothesis,
                        audio::NormalizationProfile profile = audio::NormalizationProfile::Standard);

/// Both sides are normalized first. Edits / reference tokens; an empty
/// reference yields the hypothesis token count (0 when both are empty).
/// Not clamped: insertion-heavy hypotheses exceed 1.
double wer(const std::string& reference, const std::string& hypothesis,
           audio::NormalizationProfile profile = audio::NormalizationProfile::Standard);

/// As wer() over code points of the normalized strings, spaces included.
double cer(const std::string& reference, const std::string& hypothesis,
           audio::NormalizationProfile profile = audio::NormalizationProfile::Standard);

struct LabelInstance {
  std::set<std::string> truth;
  std::vector<std::pair<std::string, double>> predicted;  // label, confidence
};

inline constexpr double kDefaultF1Threshold = 0.5;

/// Labels with confidence >= threshold.
std::set<std::string> thresholded(const LabelInstance& instance, double threshold);

/// Pooled TP/FP/FN over all labels: 2TP / (2TP + FP + FN), 0 when undefined.
double micro_f1(const std::vector<LabelInstance>& instances, double threshold = kDefaultF1Threshold);

/// Mean per-label F1 over `label_space`, or, when absent, over every label that
/// is true somewhere or predicted at or above the threshold somewhere. A label
/// with no positives and no predictions scores 0.
double macro_f1(const std::vector<LabelInstance>& instances, double threshold = kDefaultF1Threshold,
                const std::optional<std::set<std::string>>& label_space = std::nullopt);

enum class HitRule { AnyLabel, AllLabels };

/// The k highest-confidence labels, ties broken by ascending label.
std::vector<std::string> top_k(const LabelInstance& instance, std::size_t k);

/// Fraction of instances whose top-k contains any (or every) true label.
/// Instances with no true labels never count as hits.
double acc_at_k(const std::vector<LabelInstance>& instances, std::size_t k, HitRule rule = HitRule::AnyLabel);

struct FrameTruth {
  std::uint32_t frame_id = 0;
  std::string label;
};

struct InterventionAccuracy {
  std::size_t frames = 0;
  std::size_t correct = 0;
  double overall = 0;  // correct / frames, 0 when no frames
  std::map<std::string, std::pair<std::size_t, std::size_t>> per_label;  // label -> (correct, frames)
};

/// Ground-truth frames without a prediction count as incorrect.
InterventionAccuracy intervention_accuracy(const std::map<std::uint32_t, std::string>& frame_predictions,
                                           const std::vector<FrameTruth>& ground_truth);

}  // namespace emsrt::eval
