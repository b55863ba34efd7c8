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

#include <thread>

#include "emsrt/common/base64.hpp"
#include "emsrt/common/csv.hpp"
#include "emsrt/common/error.hpp"
#include "emsrt/common/line_channel.hpp"
#include "emsrt/common/queues.hpp"
#include "emsrt/common/rng.hpp"
#include "emsrt/common/trace.hpp"
#include "test_support.hpp"

namespace emsrt {
namespace {

TEST(Base64, RoundTripsRandomBuffers) {
  Rng rng(1);
  for (std::size_t n = 0; n < 200; ++n) {
    std::vector<std::uint8_t> bytes(n);
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rng.bits());
    EXPECT_EQ(base64_decode(base64_encode(bytes)), bytes) << n;
  }
}

TEST(Base64, KnownVectors) {
  const std::string foobar = "foobar";
  std::vector<std::uint8_t> bytes(foobar.begin(), foobar.end());
  EXPECT_EQ(base64_encode(bytes), "Zm9vYmFy");
  EXPECT_EQ(base64_encode(std::span(bytes).first(1)), "Zg==");
  EXPECT_EQ(base64_encode(std::span(bytes).first(2)), "Zm8=");
}

TEST(Base64, RejectsGarbage) {
  EXPECT_THROW(base64_decode("Zm9v!mFy"), AdapterError);
  EXPECT_THROW(base64_decode("Zm9"), AdapterError);
}

TEST(Csv, QuotesOnlyWhenNeeded) {
  EXPECT_EQ(csv::quote("plain"), "plain");
  EXPECT_EQ(csv::quote("a,b"), "\"a,b\"");
  EXPECT_EQ(csv::quote("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv::quote(" pad"), "\" pad\"");
}

TEST(Csv, ParseInvertsRow) {
  const std::vector<std::string> fields = {"medical - chest pain (protocol 2 - 1)", "x,y", "q\"uote", "", " lead"};
  EXPECT_EQ(csv::parse_line(csv::row(fields)), fields);
}

TEST(BoundedQueue, BlocksProducerWhileFull) {
  BoundedQueue<int> q(2);
  ASSERT_TRUE(q.push(1));
  ASSERT_TRUE(q.push(2));
  std::atomic<bool> pushed{false};
  std::thread producer([&] {
    q.push(3);
    pushed = true;
  });
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  EXPECT_FALSE(pushed);
  EXPECT_EQ(q.pop(), 1);
  producer.join();
  EXPECT_TRUE(pushed);
  EXPECT_EQ(q.pop(), 2);
  EXPECT_EQ(q.pop(), 3);
}

TEST(BoundedQueue, CloseDrainsThenEnds) {
  BoundedQueue<int> q(4);
  q.push(7);
  q.close();
  EXPECT_FALSE(q.push(8));
  EXPECT_EQ(q.pop(), 7);
  EXPECT_EQ(q.pop(), std::nullopt);
  EXPECT_TRUE(q.exhausted());
}

TEST(BoundedQueue, CloseWakesBlockedProducer) {
  BoundedQueue<int> q(1);
  q.push(1);
  std::thread producer([&] { EXPECT_FALSE(q.push(2)); });
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  q.close();
  producer.join();
}

TEST(DropOldestQueue, EvictsOldestAndCounts) {
  DropOldestQueue<int> q(3);
  for (int i = 0; i < 5; ++i) q.push(i);
  EXPECT_EQ(q.dropped(), 2u);
  EXPECT_EQ(q.pop(), 2);
  EXPECT_EQ(q.pop(), 3);
  EXPECT_EQ(q.pop(), 4);
  EXPECT_EQ(q.pop_for(std::chrono::milliseconds(1)), std::nullopt);
}

TEST(Rng, SeededStreamsRepeat) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.bits(), b.bits());
}

TEST(Rng, UniformStaysInUnitInterval) {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
  EXPECT_EQ(unit_interval(~std::uint64_t{0}), 1.0 - 0x1.0p-53);
}

TEST(Rng, BelowCoversRangeEvenly) {
  Rng rng(5);
  std::vector<int> hist(7);
  for (int i = 0; i < 70000; ++i) ++hist[rng.below(7)];
  for (int h : hist) EXPECT_NEAR(h, 10000, 500);
}

TEST(Trace, OrderedTraceHasNoViolation) {
  LatencyTrace t;
  t.t_window_ready = 1;
  t.t_asr_start = 2;
  t.t_asr_done = 3;
  t.t_protocol_start = 3;
  t.t_protocol_done = 4;
  t.t_vision_start = 5;
  t.t_feedback_enqueued = 5;
  t.t_feedback_dequeued = 6;
  t.t_feedback_sent = 7;
  t.t_vision_done = 6;
  t.t_intervention_sent = 9;
  EXPECT_EQ(first_ordering_violation(t), "");
}

TEST(Trace, NamesFirstOutOfOrderField) {
  LatencyTrace t;
  t.t_asr_start = 10;
  t.t_asr_done = 5;
  EXPECT_EQ(first_ordering_violation(t), "t_asr_done");
  LatencyTrace v;
  v.t_protocol_done = 10;
  v.t_vision_start = 9;
  EXPECT_EQ(first_ordering_violation(v), "t_vision_start");
}

TEST(Trace, JsonRoundTripKeepsAbsentFieldsAbsent) {
  LatencyTrace t;
  t.window_id = 4;
  t.t_asr_start = 100;
  t.t_feedback_sent = 250;
  const auto j = trace_to_json(t);
  EXPECT_FALSE(j.contains("t_vision_start"));
  EXPECT_EQ(trace_from_json(j), t);
}

TEST(LineChannel, ExecEndpointRoundTrip) {
  JsonAdapterClient client(open_line_channel(testing::fake_adapter("asr")));
  const auto resp = client.call({{"v", 1}, {"window_id", 9}}, "window_id", std::chrono::milliseconds(2000));
  ASSERT_TRUE(resp);
  EXPECT_EQ(resp->at("text"), "heard window 9");
}

TEST(LineChannel, TimeoutThenLateAnswerIsDiscarded) {
  JsonAdapterClient client(open_line_channel(testing::fake_adapter("asr", "--delay-ms 150")));
  EXPECT_FALSE(client.call({{"window_id", 1}}, "window_id", std::chrono::milliseconds(20)));
  const auto resp = client.call({{"window_id", 2}}, "window_id", std::chrono::milliseconds(2000));
  ASSERT_TRUE(resp);
  EXPECT_EQ(resp->at("window_id"), 2);
}

TEST(LineChannel, PeerExitIsAnAdapterError) {
  JsonAdapterClient client(open_line_channel(testing::fake_adapter("asr", "--exit-after 0")));
  EXPECT_THROW(client.call({{"window_id", 1}}, "window_id", std::chrono::milliseconds(2000)), AdapterError);
}

}  // namespace
}  // namespace emsrt
