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

#include "emsrt/eval/metrics.hpp"

#include <algorithm>
#include <sstream>

namespace emsrt::eval {

std::vector<std::string> tokenize(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(std::move(t));
  return out;
}

std::vector<std::uint32_t> code_points(const std::string& text) {
  std::vector<std::uint32_t> out;
  const auto* s = reinterpret_cast<const unsigned char*>(text.data());
  const std::size_t n = text.size();
  for (std::size_t i = 0; i < n;) {
    const unsigned char c = s[i];
    std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 0;
    bool valid = len > 0 && i + len <= n;
    for (std::size_t k = 1; valid && k < len; ++k) valid = (s[i + k] & 0xC0) == 0x80;
    if (!valid) {
      out.push_back(c);
      ++i;
      continue;
    }
    std::uint32_t cp = len == 1 ? c : c & (0xFF >> (len + 1));
    for (std::size_t k = 1; k < len; ++k) cp = (cp << 6) | (s[i + k] & 0x3F);
    out.push_back(cp);
    i += len;
  }
  return out;
}

double ErrorCounts::rate() const {
  if (reference_length == 0) return static_cast<double>(hypothesis_length);
  return static_cast<double>(edits) / static_cast<double>(reference_length);
}

ErrorCounts word_errors(const std::string& reference, const std::string& hypothesis,
                        audio::NormalizationProfile profile) {
  const auto r = tokenize(audio::normalize_text(reference, profile));
  const auto h = tokenize(audio::normalize_text(hypothesis, profile));
  return {levenshtein(r, h), r.size(), h.size()};
}

ErrorCounts char_errors(const std::string& reference, const std::string& hypothesis,
                        audio::NormalizationProfile profile) {
  const auto r = code_points(audio::normalize_text(reference, profile));
  const auto h = code_points(audio::normalize_text(hypothesis, profile));
  return {levenshtein(r, h), r.size(), h.size()};
}

double wer(const std::string& reference, const std::string& hypothesis, audio::NormalizationProfile profile) {
  return word_errors(reference, hypothesis, profile).rate();
}

double cer(const std::string& reference, const std::string& hypothesis, audio::NormalizationProfile profile) {
  return char_errors(reference, hypothesis, profile).rate();
}

std::set<std::string> thresholded(const LabelInstance& instance, double threshold) {
  std::set<std::string> out;
  for (const auto& [label, conf] : instance.predicted)
    if (conf >= threshold) out.insert(label);
  return out;
}

double micro_f1(const std::vector<LabelInstance>& instances, double threshold) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& inst : instances) {
    const auto pred = thresholded(inst, threshold);
    for (const auto& l : pred) (inst.truth.count(l) ? tp : fp)++;
    for (const auto& l : inst.truth)
      if (!pred.count(l)) ++fn;
  }
  const std::size_t denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

double macro_f1(const std::vector<LabelInstance>& instances, double threshold,
                const std::optional<std::set<std::string>>& label_space) {
  std::vector<std::set<std::string>> preds;
  preds.reserve(instances.size());
  for (const auto& inst : instances) preds.push_back(thresholded(inst, threshold));

  std::set<std::string> labels;
  if (label_space) {
    labels = *label_space;
  } else {
    for (std::size_t i = 0; i < instances.size(); ++i) {
      labels.insert(instances[i].truth.begin(), instances[i].truth.end());
      labels.insert(preds[i].begin(), preds[i].end());
    }
  }
  if (labels.empty()) return 0.0;
  double sum = 0;
  for (const auto& l : labels) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < instances.size(); ++i) {
      const bool t = instances[i].truth.count(l) > 0;
      const bool p = preds[i].count(l) > 0;
      if (t && p) ++tp;
      else if (p) ++fp;
      else if (t) ++fn;
    }
    const std::size_t denom = 2 * tp + fp + fn;
    sum += denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
  }
  return sum / static_cast<double>(labels.size());
}

std::vector<std::string> top_k(const LabelInstance& instance, std::size_t k) {
  auto ranked = instance.predicted;
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ranked.size() && out.size() < k; ++i) out.push_back(ranked[i].first);
  return out;
}

double acc_at_k(const std::vector<LabelInstance>& instances, std::size_t k, HitRule rule) {
  if (instances.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& inst : instances) {
    if (inst.truth.empty()) continue;
    const auto top = top_k(inst, k);
    auto in_top = [&](const std::string& l) { return std::find(top.begin(), top.end(), l) != top.end(); };
    const bool hit = rule == HitRule::AnyLabel ? std::any_of(inst.truth.begin(), inst.truth.end(), in_top)
                                               : std::all_of(inst.truth.begin(), inst.truth.end(), in_top);
    if (hit) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(instances.size());
}

InterventionAccuracy intervention_accuracy(const std::map<std::uint32_t, std::string>& frame_predictions,
                                           const std::vector<FrameTruth>& ground_truth) {
  InterventionAccuracy out;
  for (const auto& gt : ground_truth) {
    auto it = frame_predictions.find(gt.frame_id);
    const bool ok = it != frame_predictions.end() && it->second == gt.label;
    ++out.frames;
    auto& [c, n] = out.per_label[gt.label];
    ++n;
    if (ok) {
      ++out.correct;
      ++c;
    }
  }
  out.overall = out.frames ? static_cast<double>(out.correct) / static_cast<double>(out.frames) : 0.0;
  return out;
}

}  // namespace emsrt::eval
