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

#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "clot/core.hpp"
#include "clot/motion_data.hpp"

namespace clot {

inline constexpr std::array<uint8_t, 4> kWireMagic = {'C', 'L', 'O', 'T'};
inline constexpr uint8_t kWireVersion = 1;
inline constexpr size_t kWireHeaderSize = 4 + 1 + 8 + 2;  // magic, version, timestamp, count
inline constexpr size_t kWireRootSize = 7 * 4;            // quat wxyz + pos xyz, f32

/// One mocap frame on the wire. Values are stored as the 32-bit floats that
/// travel over the link, so encode/decode round trips are bit exact.
struct WireFrame {
  uint64_t timestamp_us = 0;
  std::array<float, 4> root_quat = {1.0f, 0.0f, 0.0f, 0.0f};  // w, x, y, z
  std::array<float, 3> root_pos = {0.0f, 0.0f, 0.0f};
  std::vector<std::array<float, 3>> keypoints;

  bool operator==(const WireFrame& other) const = default;
};

inline size_t wire_frame_size(size_t keypoint_count) {
  return kWireHeaderSize + kWireRootSize + 12 * keypoint_count;
}

namespace detail {

inline void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xff));
  out.push_back(static_cast<uint8_t>(v >> 8));
}

inline void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

inline void put_f32(std::vector<uint8_t>& out, float v) {
  const uint32_t bits = std::bit_cast<uint32_t>(v);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>((bits >> (8 * i)) & 0xff));
}

inline uint16_t get_u16(const uint8_t* p) {
  return static_cast<uint16_t>(static_cast<uint16_t>(p[0]) | (static_cast<uint16_t>(p[1]) << 8));
}

inline uint32_t get_u32(const uint8_t* p) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(p[i]) << (8 * i);
  return v;
}

inline uint64_t get_u64(const uint8_t* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
  return v;
}

inline float get_f32(const uint8_t* p) { return std::bit_cast<float>(get_u32(p)); }

}  // namespace detail

inline std::vector<uint8_t> encode_frame(const WireFrame& frame) {
  require(frame.keypoints.size() <= 0xffff, "encode_frame: keypoint count exceeds u16");
  std::vector<uint8_t> out;
  out.reserve(wire_frame_size(frame.keypoints.size()));
  for (uint8_t b : kWireMagic) out.push_back(b);
  out.push_back(kWireVersion);
  detail::put_u64(out, frame.timestamp_us);
  detail::put_u16(out, static_cast<uint16_t>(frame.keypoints.size()));
  for (float v : frame.root_quat) detail::put_f32(out, v);
  for (float v : frame.root_pos) detail::put_f32(out, v);
  for (const auto& kp : frame.keypoints)
    for (float v : kp) detail::put_f32(out, v);
  return out;
}

inline WireFrame decode_frame(const uint8_t* data, size_t size) {
  require(size >= kWireHeaderSize + kWireRootSize, "decode_frame: buffer shorter than fixed header");
  require(std::memcmp(data, kWireMagic.data(), 4) == 0, "decode_frame: bad magic");
  require(data[4] == kWireVersion,
          "decode_frame: unknown version " + std::to_string(static_cast<int>(data[4])));
  WireFrame frame;
  frame.timestamp_us = detail::get_u64(data + 5);
  const uint16_t count = detail::get_u16(data + 13);
  require(size == wire_frame_size(count),
          "decode_frame: length " + std::to_string(size) + " does not match keypoint count " +
              std::to_string(count));
  const uint8_t* p = data + kWireHeaderSize;
  for (auto& v : frame.root_quat) {
    v = detail::get_f32(p);
    p += 4;
  }
  for (auto& v : frame.root_pos) {
    v = detail::get_f32(p);
    p += 4;
  }
  frame.keypoints.resize(count);
  for (auto& kp : frame.keypoints)
    for (auto& v : kp) {
      v = detail::get_f32(p);
      p += 4;
    }
  return frame;
}

inline WireFrame decode_frame(const std::vector<uint8_t>& bytes) {
  return decode_frame(bytes.data(), bytes.size());
}

/// Narrows a motion frame to the wire representation (f32, microseconds).
inline WireFrame wire_from_motion(const MotionFrame& frame) {
  WireFrame out;
  require(frame.t >= 0.0, "wire_from_motion: negative timestamp");
  out.timestamp_us = static_cast<uint64_t>(std::llround(frame.t * 1e6));
  out.root_quat = {static_cast<float>(frame.root.rotation.w()), static_cast<float>(frame.root.rotation.x()),
                   static_cast<float>(frame.root.rotation.y()), static_cast<float>(frame.root.rotation.z())};
  out.root_pos = {static_cast<float>(frame.root.translation.x()),
                  static_cast<float>(frame.root.translation.y()),
                  static_cast<float>(frame.root.translation.z())};
  out.keypoints.reserve(frame.keypoints.size());
  for (const auto& kp : frame.keypoints)
    out.keypoints.push_back({static_cast<float>(kp.x()), static_cast<float>(kp.y()),
                             static_cast<float>(kp.z())});
  return out;
}

/// Widens a wire frame back to a motion frame (joint and contact channels
/// do not travel over the wire).
inline MotionFrame motion_from_wire(const WireFrame& frame) {
  MotionFrame out;
  out.t = static_cast<double>(frame.timestamp_us) * 1e-6;
  Quat q(frame.root_quat[0], frame.root_quat[1], frame.root_quat[2], frame.root_quat[3]);
  require(q.norm() > 1e-6, "motion_from_wire: near-zero root quaternion");
  out.root.rotation = q.normalized();
  out.root.translation = Vec3(frame.root_pos[0], frame.root_pos[1], frame.root_pos[2]);
  out.keypoints.reserve(frame.keypoints.size());
  for (const auto& kp : frame.keypoints) out.keypoints.emplace_back(kp[0], kp[1], kp[2]);
  return out;
}

}  // namespace clot
