#include "logoco/detector/wire.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace logoco::wire {
namespace {

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

void write_all(int fd, const char* data, std::size_t n) {
  while (n > 0) {
    const auto written = ::write(fd, data, n);
    if (written < 0) {
      if (errno == EINTR) continue;
      throw WireError(errno_text("write failed"));
    }
    data += written;
    n -= static_cast<std::size_t>(written);
  }
}

}  // namespace

std::string encode_frame(std::string_view payload) {
  if (payload.size() > kMaxFrameBytes) throw WireError("frame too large");
  const auto n = static_cast<std::uint32_t>(payload.size());
  std::string out;
  out.reserve(payload.size() + 4);
  out.push_back(static_cast<char>((n >> 24) & 0xff));
  out.push_back(static_cast<char>((n >> 16) & 0xff));
  out.push_back(static_cast<char>((n >> 8) & 0xff));
  out.push_back(static_cast<char>(n & 0xff));
  out.append(payload);
  return out;
}

// ---- FdTransport -----------------------------------------------------------

FdTransport::FdTransport(int read_fd, int write_fd, bool owns_fds)
    : read_fd_(read_fd), write_fd_(write_fd), owns_(owns_fds) {}

FdTransport::~FdTransport() {
  if (!owns_) return;
  ::close(read_fd_);
  if (write_fd_ != read_fd_) ::close(write_fd_);
}

void FdTransport::send_frame(std::string_view payload) {
  const auto frame = encode_frame(payload);
  write_all(write_fd_, frame.data(), frame.size());
}

void FdTransport::read_exact(char* dst, std::size_t n,
                             std::chrono::steady_clock::time_point deadline) {
  while (n > 0) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw WireError("timed out waiting for reply");
    pollfd pfd{read_fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw WireError(errno_text("poll failed"));
    }
    if (ready == 0) throw WireError("timed out waiting for reply");
    const auto got = ::read(read_fd_, dst, n);
    if (got < 0) {
      if (errno == EINTR) continue;
      throw WireError(errno_text("read failed"));
    }
    if (got == 0) throw WireError("peer closed the connection");
    dst += got;
    n -= static_cast<std::size_t>(got);
  }
}

std::string FdTransport::receive_frame(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  unsigned char head[4];
  read_exact(reinterpret_cast<char*>(head), 4, deadline);
  const std::uint32_t n = (static_cast<std::uint32_t>(head[0]) << 24) |
                          (static_cast<std::uint32_t>(head[1]) << 16) |
                          (static_cast<std::uint32_t>(head[2]) << 8) | head[3];
  if (n > kMaxFrameBytes) throw WireError("incoming frame too large");
  std::string payload(n, '\0');
  read_exact(payload.data(), n, deadline);
  return payload;
}

std::string FdTransport::round_trip(std::string_view message, std::chrono::milliseconds timeout) {
  send_frame(message);
  return receive_frame(timeout);
}

// ---- Unix socket -----------------------------------------------------------

std::unique_ptr<Transport> connect_unix(const std::string& path) {
  sockaddr_un addr{};
  if (path.size() >= sizeof(addr.sun_path)) throw WireError("socket path too long: " + path);
  const int fd = ::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd < 0) throw WireError(errno_text("socket failed"));
  ::signal(SIGPIPE, SIG_IGN);
  addr.sun_family = AF_UNIX;
  std::memcpy(addr.sun_path, path.c_str(), path.size() + 1);
  if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) < 0) {
    const auto msg = errno_text(("connect to " + path + " failed").c_str());
    ::close(fd);
    throw WireError(msg);
  }
  return std::make_unique<FdTransport>(fd, fd, true);
}

// ---- child process ---------------------------------------------------------

ProcessTransport::ProcessTransport(const std::vector<std::string>& argv) {
  if (argv.empty()) throw WireError("empty detector command");
  int to_child[2];
  int from_child[2];
  if (::pipe2(to_child, O_CLOEXEC) < 0) throw WireError(errno_text("pipe failed"));
  if (::pipe2(from_child, O_CLOEXEC) < 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw WireError(errno_text("pipe failed"));
  }
  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  const pid_t pid = ::fork();
  if (pid < 0) throw WireError(errno_text("fork failed"));
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::execvp(args[0], args.data());
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  pid_ = pid;
  pipes_ = std::make_unique<FdTransport>(from_child[0], to_child[1], true);
  // A dead child must surface as EPIPE, not kill us.
  ::signal(SIGPIPE, SIG_IGN);
}

ProcessTransport::~ProcessTransport() {
  pipes_.reset();  // closing stdin lets a well-behaved child exit
  if (pid_ > 0) {
    int status = 0;
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) == pid_) return;
      ::usleep(10000);
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, &status, 0);
  }
}

std::string ProcessTransport::round_trip(std::string_view message,
                                         std::chrono::milliseconds timeout) {
  return pipes_->round_trip(message, timeout);
}

}  // namespace logoco::wire
