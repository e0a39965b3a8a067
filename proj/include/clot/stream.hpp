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

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "clot/core.hpp"
#include "clot/wire.hpp"

namespace clot {

/// Upper bound on one framed message; anything larger is treated as a
/// protocol violation rather than an allocation request.
inline constexpr uint32_t kMaxWirePayload = 16u * 1024u * 1024u;

inline std::vector<uint8_t> frame_with_length(const std::vector<uint8_t>& payload) {
  require(payload.size() <= kMaxWirePayload, "frame_with_length: payload too large");
  std::vector<uint8_t> out;
  out.reserve(4 + payload.size());
  const uint32_t len = static_cast<uint32_t>(payload.size());
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>((len >> (8 * i)) & 0xff));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

/// Incremental parser for a stream of length-prefixed WireFrames. Bytes may
/// arrive in arbitrary fragments; complete frames are surfaced in order and
/// malformed input throws without emitting a partial frame.
class FrameReassembler {
 public:
  std::vector<WireFrame> feed(const uint8_t* data, size_t size) {
    buffer_.insert(buffer_.end(), data, data + size);
    std::vector<WireFrame> out;
    size_t cursor = 0;
    while (buffer_.size() - cursor >= 4) {
      const uint32_t len = detail::get_u32(buffer_.data() + cursor);
      require(len <= kMaxWirePayload, "stream: frame length " + std::to_string(len) +
                                          " exceeds protocol maximum");
      if (buffer_.size() - cursor - 4 < len) break;
      out.push_back(decode_frame(buffer_.data() + cursor + 4, len));
      cursor += 4 + len;
    }
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<long>(cursor));
    return out;
  }

  std::vector<WireFrame> feed(const std::vector<uint8_t>& bytes) {
    return feed(bytes.data(), bytes.size());
  }

  /// Bytes of an incomplete trailing frame still waiting for data.
  size_t pending_bytes() const { return buffer_.size(); }

 private:
  std::vector<uint8_t> buffer_;
};

namespace detail {

class Fd {
 public:
  explicit Fd(int fd = -1) : fd_(fd) {}
  ~Fd() { close_now(); }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  Fd(Fd&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
  Fd& operator=(Fd&& other) noexcept {
    if (this != &other) {
      close_now();
      fd_ = other.fd_;
      other.fd_ = -1;
    }
    return *this;
  }

  int get() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  void close_now() {
    if (fd_ >= 0) {
      ::close(fd_);
      fd_ = -1;
    }
  }

 private:
  int fd_;
};

inline void send_all(int fd, const uint8_t* data, size_t size) {
  size_t sent = 0;
  while (sent < size) {
    const ssize_t n = ::send(fd, data + sent, size - sent, 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail(std::string("stream send failed: ") + std::strerror(errno));
    }
    sent += static_cast<size_t>(n);
  }
}

}  // namespace detail

/// Accepts a single consumer on a TCP port and plays frames to it. Port 0
/// binds an ephemeral port, readable via port() before serving.
class StreamServer {
 public:
  explicit StreamServer(uint16_t port) : listener_(::socket(AF_INET, SOCK_STREAM, 0)) {
    require(listener_.valid(), std::string("stream: socket failed: ") + std::strerror(errno));
    const int one = 1;
    ::setsockopt(listener_.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(port);
    require(::bind(listener_.get(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0,
            std::string("stream: bind failed: ") + std::strerror(errno));
    require(::listen(listener_.get(), 1) == 0,
            std::string("stream: listen failed: ") + std::strerror(errno));
    sockaddr_in bound{};
    socklen_t len = sizeof(bound);
    require(::getsockname(listener_.get(), reinterpret_cast<sockaddr*>(&bound), &len) == 0,
            std::string("stream: getsockname failed: ") + std::strerror(errno));
    port_ = ntohs(bound.sin_port);
  }

  uint16_t port() const { return port_; }

  /// Blocks for one client, streams every frame, then closes the connection.
  void serve_frames(const std::vector<WireFrame>& frames) {
    detail::Fd client(::accept(listener_.get(), nullptr, nullptr));
    require(client.valid(), std::string("stream: accept failed: ") + std::strerror(errno));
    for (const auto& frame : frames) {
      const auto message = frame_with_length(encode_frame(frame));
      detail::send_all(client.get(), message.data(), message.size());
    }
  }

 private:
  detail::Fd listener_;
  uint16_t port_ = 0;
};

/// Connects to a serving endpoint and drains it until EOF, reassembling
/// frames across arbitrary fragmentation. Throws on protocol violations.
inline std::vector<WireFrame> consume_stream(const std::string& host, uint16_t port) {
  detail::Fd fd(::socket(AF_INET, SOCK_STREAM, 0));
  require(fd.valid(), std::string("stream: socket failed: ") + std::strerror(errno));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  require(::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) == 1,
          "stream: invalid host address '" + host + "'");
  require(::connect(fd.get(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0,
          std::string("stream: connect failed: ") + std::strerror(errno));

  FrameReassembler reassembler;
  std::vector<WireFrame> frames;
  uint8_t chunk[4096];
  for (;;) {
    const ssize_t n = ::recv(fd.get(), chunk, sizeof(chunk), 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail(std::string("stream recv failed: ") + std::strerror(errno));
    }
    if (n == 0) break;
    auto batch = reassembler.feed(chunk, static_cast<size_t>(n));
    frames.insert(frames.end(), batch.begin(), batch.end());
  }
  require(reassembler.pending_bytes() == 0,
          "stream: connection closed mid-frame with " + std::to_string(reassembler.pending_bytes()) +
              " bytes pending");
  return frames;
}

inline std::vector<WireFrame> clip_to_wire(const MotionClip& clip) {
  std::vector<WireFrame> frames;
  frames.reserve(clip.frames.size());
  for (const auto& frame : clip.frames) frames.push_back(wire_from_motion(frame));
  return frames;
}

}  // namespace clot
