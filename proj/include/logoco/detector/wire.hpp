#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "logoco/core/error.hpp"

namespace logoco::wire {

// Frames are a 4-byte big-endian payload length followed by the UTF-8 JSON
// payload.
inline constexpr std::uint32_t kMaxFrameBytes = 64u << 20;

std::string encode_frame(std::string_view payload);

/// Low-level transport failure (broken pipe, timeout, bad frame).
class WireError : public Error {
 public:
  using Error::Error;
};

class Transport {
 public:
  virtual ~Transport() = default;
  /// Sends one message and blocks for the reply, at most `timeout`.
  virtual std::string round_trip(std::string_view message, std::chrono::milliseconds timeout) = 0;
};

/// Frames over a pair of file descriptors (a socket uses the same fd twice).
class FdTransport : public Transport {
 public:
  FdTransport(int read_fd, int write_fd, bool owns_fds);
  ~FdTransport() override;
  FdTransport(const FdTransport&) = delete;
  FdTransport& operator=(const FdTransport&) = delete;

  std::string round_trip(std::string_view message, std::chrono::milliseconds timeout) override;

  void send_frame(std::string_view payload);
  std::string receive_frame(std::chrono::milliseconds timeout);

 private:
  void read_exact(char* dst, std::size_t n, std::chrono::steady_clock::time_point deadline);

  int read_fd_;
  int write_fd_;
  bool owns_;
};

/// Connects to a listening Unix domain socket.
std::unique_ptr<Transport> connect_unix(const std::string& path);

/// Spawns `argv` and talks frames over the child's stdin/stdout.
class ProcessTransport final : public Transport {
 public:
  explicit ProcessTransport(const std::vector<std::string>& argv);
  ~ProcessTransport() override;
  ProcessTransport(const ProcessTransport&) = delete;
  ProcessTransport& operator=(const ProcessTransport&) = delete;

  std::string round_trip(std::string_view message, std::chrono::milliseconds timeout) override;

 private:
  int pid_ = -1;
  std::unique_ptr<FdTransport> pipes_;
};

}  // namespace logoco::wire
