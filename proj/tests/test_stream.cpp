// Copyright 2026 The CLOT Authors.
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

#include "clot/stream.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <thread>

#include "clot/rng.hpp"
#include "clot/synthetic.hpp"

namespace clot {
namespace {

WireFrame make_frame(Rng& rng, int keypoints) {
  WireFrame frame;
  frame.timestamp_us = rng.next_u64() >> 20;
  for (auto& v : frame.root_quat) v = static_cast<float>(rng.normal());
  for (auto& v : frame.root_pos) v = static_cast<float>(rng.normal());
  for (int i = 0; i < keypoints; ++i)
    frame.keypoints.push_back({static_cast<float>(rng.normal()), static_cast<float>(rng.normal()),
                               static_cast<float>(rng.normal())});
  return frame;
}

TEST_CASE("reassembler survives one-byte fragmentation") {
  Rng rng(110);
  std::vector<WireFrame> sent;
  std::vector<uint8_t> stream;
  for (int i = 0; i < 5; ++i) {
    sent.push_back(make_frame(rng, static_cast<int>(rng.uniform_int(0, 6))));
    const auto message = frame_with_length(encode_frame(sent.back()));
    stream.insert(stream.end(), message.begin(), message.end());
  }

  FrameReassembler reassembler;
  std::vector<WireFrame> received;
  for (uint8_t byte : stream) {
    const auto batch = reassembler.feed(&byte, 1);
    received.insert(received.end(), batch.begin(), batch.end());
  }
  REQUIRE(received == sent);
  REQUIRE(reassembler.pending_bytes() == 0);
}

TEST_CASE("reassembler handles random fragment boundaries") {
  Rng rng(111);
  std::vector<WireFrame> sent;
  std::vector<uint8_t> stream;
  for (int i = 0; i < 40; ++i) {
    sent.push_back(make_frame(rng, static_cast<int>(rng.uniform_int(0, 12))));
    const auto message = frame_with_length(encode_frame(sent.back()));
    stream.insert(stream.end(), message.begin(), message.end());
  }

  FrameReassembler reassembler;
  std::vector<WireFrame> received;
  size_t cursor = 0;
  while (cursor < stream.size()) {
    const size_t chunk =
        std::min(stream.size() - cursor, static_cast<size_t>(rng.uniform_int(1, 97)));
    const auto batch = reassembler.feed(stream.data() + cursor, chunk);
    received.insert(received.end(), batch.begin(), batch.end());
    cursor += chunk;
  }
  REQUIRE(received == sent);
  REQUIRE(reassembler.pending_bytes() == 0);
}

TEST_CASE("partial trailing frame stays pending") {
  Rng rng(112);
  const auto message = frame_with_length(encode_frame(make_frame(rng, 3)));
  FrameReassembler reassembler;
  const auto batch = reassembler.feed(message.data(), message.size() - 4);
  REQUIRE(batch.empty());
  REQUIRE(reassembler.pending_bytes() == message.size() - 4);
  const auto rest = reassembler.feed(message.data() + message.size() - 4, 4);
  REQUIRE(rest.size() == 1);
  REQUIRE(reassembler.pending_bytes() == 0);
}

TEST_CASE("protocol violations throw instead of allocating") {
  SECTION("absurd length prefix") {
    const std::vector<uint8_t> bytes = {0xff, 0xff, 0xff, 0xff};
    FrameReassembler reassembler;
    REQUIRE_THROWS_WITH(reassembler.feed(bytes),
                        Catch::Matchers::ContainsSubstring("protocol maximum"));
  }
  SECTION("corrupt frame inside a valid envelope") {
    Rng rng(113);
    auto message = frame_with_length(encode_frame(make_frame(rng, 1)));
    message[4] = 'X';  // clobber the magic inside the envelope
    FrameReassembler reassembler;
    REQUIRE_THROWS_WITH(reassembler.feed(message), Catch::Matchers::ContainsSubstring("magic"));
  }
  SECTION("oversized payload refused at framing time") {
    std::vector<uint8_t> payload(kMaxWirePayload + 1);
    REQUIRE_THROWS_AS(frame_with_length(payload), Error);
  }
}

TEST_CASE("loopback stream reproduces a clip exactly") {
  const RobotModel model = make_humanoid23();
  SyntheticClipSpec spec;
  spec.motion = SyntheticMotion::kWalk;
  spec.duration = 0.5;
  spec.fps = 30.0;
  const MotionClip clip = make_humanoid_clip(model, spec, "loopback_walk", Category::kWalk);
  const std::vector<WireFrame> frames = clip_to_wire(clip);
  REQUIRE(frames.size() == clip.frames.size());

  StreamServer server(0);
  const uint16_t port = server.port();
  REQUIRE(port != 0);
  std::thread producer([&] { server.serve_frames(frames); });
  const std::vector<WireFrame> received = consume_stream("127.0.0.1", port);
  producer.join();

  REQUIRE(received == frames);
  // The widened frames match the original clip at wire precision.
  const MotionFrame first = motion_from_wire(received.front());
  REQUIRE((first.root.translation.cast<float>() -
           clip.frames.front().root.translation.cast<float>())
              .norm() == 0.0f);
  REQUIRE(first.keypoints.size() == clip.frames.front().keypoints.size());
}

}  // namespace
}  // namespace clot
