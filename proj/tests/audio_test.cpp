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

#include <gtest/gtest.h>

#include "emsrt/audio/normalize.hpp"
#include "emsrt/audio/transcriber.hpp"
#include "emsrt/audio/window.hpp"
#include "emsrt/common/error.hpp"
#include "emsrt/common/line_channel.hpp"
#include "test_support.hpp"

namespace emsrt::audio {
namespace {

using wire::AudioPacket;
using wire::kSamplesPerPacket;

std::vector<AudioPacket> packets_of(const std::vector<std::int16_t>& pcm, std::uint64_t base_ts = 0) {
  std::vector<AudioPacket> out;
  for (std::size_t off = 0, seq = 0; off < pcm.size(); off += kSamplesPerPacket, ++seq) {
    AudioPacket p;
    p.seq = static_cast<std::uint32_t>(seq);
    p.capture_ts_us = base_ts + wire::samples_to_us(off);
    p.samples.assign(kSamplesPerPacket, 0);
    std::copy(pcm.begin() + off, pcm.begin() + std::min(pcm.size(), off + kSamplesPerPacket), p.samples.begin());
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<AudioWindow> run(WindowAccumulator& acc, const std::vector<AudioPacket>& packets, bool flush) {
  std::vector<AudioWindow> out;
  for (const auto& p : packets)
    for (auto& w : acc.push(p)) out.push_back(std::move(w));
  if (flush)
    if (auto w = acc.flush()) out.push_back(std::move(*w));
  return out;
}

TEST(WindowAccumulator, SixtySecondsMakeFifteenWindows) {
  Rng rng(1);
  const auto pcm = testing::random_pcm(rng, 60 * 16000);
  WindowAccumulator acc(kDefaultWindowSamples);
  const auto windows = run(acc, packets_of(pcm), false);
  ASSERT_EQ(windows.size(), 15u);
  for (std::uint32_t i = 0; i < windows.size(); ++i) {
    EXPECT_EQ(windows[i].window_id, i);
    EXPECT_EQ(windows[i].samples.size(), kDefaultWindowSamples);
    EXPECT_EQ(windows[i].start_ts_us, i * 4'000'000ULL);
    EXPECT_EQ(windows[i].end_ts_us, (i + 1) * 4'000'000ULL);
  }
  EXPECT_EQ(acc.buffered(), 938u * 1024 - 15u * 64000);
}

TEST(WindowAccumulator, RemainderCarriesAcrossWindows) {
  Rng rng(2);
  const auto pcm = testing::random_pcm(rng, 10 * 48000);
  WindowAccumulator acc(kLegacyWindowSamples);
  const auto windows = run(acc, packets_of(pcm), true);
  std::vector<std::int16_t> joined;
  for (const auto& w : windows) joined.insert(joined.end(), w.samples.begin(), w.samples.end());
  ASSERT_GE(joined.size(), pcm.size());
  EXPECT_TRUE(std::equal(pcm.begin(), pcm.end(), joined.begin()));
  EXPECT_EQ(windows[1].start_ts_us, 3'000'000u);
  const std::size_t packetized = (pcm.size() + 1023) / 1024 * 1024;
  EXPECT_EQ(windows.back().pad_samples, windows.size() * kLegacyWindowSamples - packetized);
}

TEST(WindowAccumulator, FlushWithEmptyBufferEmitsNothing) {
  WindowAccumulator acc(2048);
  Rng rng(3);
  run(acc, packets_of(testing::random_pcm(rng, 2048)), false);
  EXPECT_EQ(acc.flush(), std::nullopt);
}

TEST(WindowAccumulator, LostPacketsBecomeCountedZeros) {
  Rng rng(4);
  const auto pcm = testing::random_pcm(rng, 8 * 1024);
  auto packets = packets_of(pcm);
  packets.erase(packets.begin() + 3);
  WindowAccumulator acc(4096);
  const auto windows = run(acc, packets, false);
  ASSERT_EQ(windows.size(), 2u);
  EXPECT_EQ(windows[0].gap_samples, 1024u);
  EXPECT_TRUE(std::all_of(windows[0].samples.begin() + 3072, windows[0].samples.end(), [](auto s) { return s == 0; }));
  EXPECT_TRUE(std::equal(windows[1].samples.begin(), windows[1].samples.end(), pcm.begin() + 4096));
  EXPECT_EQ(acc.total_gap_samples(), 1024u);
}

TEST(WindowAccumulator, LatePacketsAreDiscarded) {
  Rng rng(5);
  auto packets = packets_of(testing::random_pcm(rng, 4 * 1024));
  std::swap(packets[1], packets[2]);
  WindowAccumulator acc(4096);
  const auto windows = run(acc, packets, false);
  EXPECT_EQ(acc.late_packets(), 1u);
  EXPECT_EQ(acc.total_gap_samples(), 1024u);
  ASSERT_EQ(windows.size(), 1u) << "the late packet's slot was zero-filled, so the window still completes";
  EXPECT_EQ(windows[0].gap_samples, 1024u);
}

TEST(WindowAccumulator, SmallWindowsCanEmitSeveralPerPacket) {
  WindowAccumulator acc(256);
  Rng rng(6);
  const auto windows = run(acc, packets_of(testing::random_pcm(rng, 1024)), false);
  EXPECT_EQ(windows.size(), 4u);
}

TEST(NumberToWords, Table) {
  const std::vector<std::pair<long, std::string>> table = {
      {0, "zero"},           {7, "seven"},
      {13, "thirteen"},      {20, "twenty"},
      {21, "twenty one"},    {99, "ninety nine"},
      {100, "one hundred"},  {105, "one hundred five"},
      {340, "three hundred forty"},
      {1000, "one thousand"},
      {2024, "two thousand twenty four"},
      {9999, "nine thousand nine hundred ninety nine"},
  };
  for (const auto& [n, words] : table) EXPECT_EQ(number_to_words(n), words) << n;
  EXPECT_EQ(number_to_words(-1), std::nullopt);
  EXPECT_EQ(number_to_words(10000), std::nullopt);
}

TEST(Normalize, StandardProfile) {
  EXPECT_EQ(normalize_text("  Patient's BP, 120/80!  ", NormalizationProfile::Standard), "patient's bp 120 80");
  EXPECT_EQ(normalize_text("'quoted' - dash", NormalizationProfile::Standard), "quoted dash");
}

TEST(Normalize, LimitedVocabSpellsNumbersAndKeepsPeriods) {
  EXPECT_EQ(normalize_text("Gave 324 mg.", NormalizationProfile::LimitedVocab), "gave three hundred twenty four mg.");
  EXPECT_EQ(normalize_text("temp 98.6", NormalizationProfile::LimitedVocab), "temp ninety eight point six");
  EXPECT_EQ(normalize_text("12345", NormalizationProfile::LimitedVocab), "12345");
}

AudioWindow window_at(std::uint32_t id, double start_s, double end_s) {
  AudioWindow w;
  w.window_id = id;
  w.start_ts_us = static_cast<std::uint64_t>(start_s * 1e6);
  w.end_ts_us = static_cast<std::uint64_t>(end_s * 1e6);
  return w;
}

TEST(ReplayTranscriber, JoinsOverlappingSegmentsInTimeOrder) {
  ReplayTranscriber t({{5.0, 6.0, "third"}, {0.5, 1.0, "first"}, {3.9, 4.2, "second"}, {8.0, 9.0, "later"}});
  EXPECT_EQ(t.transcribe(window_at(0, 0, 4)).text, "first second");
  EXPECT_EQ(t.transcribe(window_at(1, 4, 8)).text, "second third");
  EXPECT_EQ(t.transcribe(window_at(2, 8, 12)).text, "later");
  EXPECT_EQ(t.transcribe(window_at(3, 12, 16)).text, "");
}

TEST(ReplayTranscriber, EndIsExclusive) {
  ReplayTranscriber t({{4.0, 5.0, "edge"}});
  EXPECT_EQ(t.transcribe(window_at(0, 0, 4)).text, "");
  EXPECT_EQ(t.transcribe(window_at(1, 4, 8)).text, "edge");
}

TEST(NullTranscriber, AlwaysEmpty) {
  NullTranscriber t;
  const auto seg = t.transcribe(window_at(6, 0, 4));
  EXPECT_EQ(seg.window_id, 6u);
  EXPECT_EQ(seg.text, "");
  EXPECT_EQ(seg.transcriber_id, "null");
}

TEST(AdapterTranscriber, UsesEngineAnswer) {
  AdapterTranscriber t(open_line_channel(testing::fake_adapter("asr")), std::chrono::milliseconds(3000));
  auto w = window_at(4, 16, 20);
  w.samples.assign(64000, 1);
  const auto seg = t.transcribe(w);
  EXPECT_EQ(seg.text, "heard window 4");
  EXPECT_FALSE(seg.timed_out);
}

TEST(AdapterTranscriber, TimeoutYieldsEmptyFlaggedSegment) {
  AdapterTranscriber t(open_line_channel(testing::fake_adapter("asr", "--delay-ms 300")), std::chrono::milliseconds(30));
  const auto seg = t.transcribe(window_at(1, 4, 8));
  EXPECT_TRUE(seg.timed_out);
  EXPECT_EQ(seg.text, "");
  EXPECT_EQ(t.timeouts(), 1u);
}

}  // namespace
}  // namespace emsrt::audio
