// Copyright 2026 The Cyclotest Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "cyclotest/mediator/protocol.hpp"

namespace cyclotest::mediator {

// A bidirectional stream of newline-terminated messages.
class LineChannel {
 public:
  virtual ~LineChannel() = default;
  virtual void write_line(const std::string& line) = 0;
  // Negative timeout waits forever.
  virtual std::string read_line(std::chrono::milliseconds timeout) = 0;
  virtual void close() = 0;
};

inline void ignore_sigpipe() {
  static const bool once = [] {
    ::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)once;
}

inline std::string errno_text(const char* what) {
  return std::string(what) + ": " + std::strerror(errno);
}

class FdChannel : public LineChannel {
 public:
  // Owns the descriptors when `owned`; read and write may be the same fd.
  FdChannel(int read_fd, int write_fd, bool owned = true)
      : read_fd_(read_fd), write_fd_(write_fd), owned_(owned) {
    ignore_sigpipe();
  }
  ~FdChannel() override { close(); }
  FdChannel(const FdChannel&) = delete;
  FdChannel& operator=(const FdChannel&) = delete;

  void write_line(const std::string& line) override {
    if (write_fd_ < 0) throw DisconnectError("channel closed");
    std::string data = line + "\n";
    std::size_t off = 0;
    while (off < data.size()) {
      ssize_t n = ::write(write_fd_, data.data() + off, data.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw DisconnectError(errno_text("write"));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  std::string read_line(std::chrono::milliseconds timeout) override {
    using Clock = std::chrono::steady_clock;
    auto deadline = Clock::now() + timeout;
    for (;;) {
      if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      if (read_fd_ < 0) throw DisconnectError("channel closed");
      int wait = -1;
      if (timeout.count() >= 0) {
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
        if (left.count() <= 0) throw TimeoutError("no message within " + std::to_string(timeout.count()) + " ms");
        wait = static_cast<int>(left.count());
      }
      pollfd p{read_fd_, POLLIN, 0};
      int r = ::poll(&p, 1, wait);
      if (r < 0) {
        if (errno == EINTR) continue;
        throw DisconnectError(errno_text("poll"));
      }
      if (r == 0) continue;
      char chunk[4096];
      ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        throw DisconnectError(errno_text("read"));
      }
      if (n == 0) throw DisconnectError("peer closed the stream");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  void close() override {
    if (owned_) {
      if (read_fd_ >= 0) ::close(read_fd_);
      if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
    }
    read_fd_ = write_fd_ = -1;
  }

 private:
  int read_fd_;
  int write_fd_;
  bool owned_;
  std::string buffer_;
};

struct HostPort {
  std::string host;
  int port = 0;

  static HostPort parse(const std::string& text) {
    auto colon = text.rfind(':');
    if (colon == std::string::npos) throw Error("expected host:port, got '" + text + "'");
    HostPort hp{text.substr(0, colon), 0};
    try {
      std::size_t used = 0;
      hp.port = std::stoi(text.substr(colon + 1), &used);
      if (used != text.size() - colon - 1 || hp.port < 0 || hp.port > 65535) throw Error("");
    } catch (const std::exception&) {
      throw Error("bad port in '" + text + "'");
    }
    if (hp.host.empty()) hp.host = "127.0.0.1";
    return hp;
  }
  std::string str() const { return host + ":" + std::to_string(port); }
};

inline std::unique_ptr<LineChannel> tcp_connect(const HostPort& addr,
                                                std::chrono::milliseconds timeout = std::chrono::seconds(5)) {
  ignore_sigpipe();
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (int rc = ::getaddrinfo(addr.host.c_str(), std::to_string(addr.port).c_str(), &hints, &res); rc != 0) {
    throw DisconnectError("cannot resolve " + addr.str() + ": " + ::gai_strerror(rc));
  }
  std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, ::freeaddrinfo);
  auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    for (addrinfo* ai = res; ai; ai = ai->ai_next) {
      int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
      if (fd < 0) continue;
      if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
        int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
        return std::make_unique<FdChannel>(fd, fd);
      }
      ::close(fd);
    }
    // The server may still be starting up.
    if (std::chrono::steady_clock::now() >= deadline) {
      throw DisconnectError("cannot connect to " + addr.str());
    }
    ::usleep(20000);
  }
}

class TcpListener {
 public:
  explicit TcpListener(const HostPort& addr) {
    ignore_sigpipe();
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw Error(errno_text("socket"));
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_port = htons(static_cast<std::uint16_t>(addr.port));
    if (::inet_pton(AF_INET, addr.host == "localhost" ? "127.0.0.1" : addr.host.c_str(), &sa.sin_addr) != 1) {
      ::close(fd_);
      throw Error("listen address must be an IPv4 address: " + addr.host);
    }
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&sa), sizeof sa) < 0 || ::listen(fd_, 8) < 0) {
      std::string msg = errno_text("bind");
      ::close(fd_);
      throw Error(msg);
    }
    socklen_t len = sizeof sa;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&sa), &len);
    bound_ = {addr.host, ntohs(sa.sin_port)};
  }
  ~TcpListener() {
    if (fd_ >= 0) ::close(fd_);
  }
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  // The actual address; port 0 requests an ephemeral port.
  const HostPort& address() const { return bound_; }

  std::unique_ptr<LineChannel> accept() {
    for (;;) {
      int fd = ::accept(fd_, nullptr, nullptr);
      if (fd >= 0) {
        int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
        return std::make_unique<FdChannel>(fd, fd);
      }
      if (errno != EINTR) throw Error(errno_text("accept"));
    }
  }

 private:
  int fd_ = -1;
  HostPort bound_;
};

// A child process run through /bin/sh whose stdin/stdout carry the protocol.
// stderr is inherited.
class ChildProcess : public LineChannel {
 public:
  explicit ChildProcess(const std::string& command) {
    ignore_sigpipe();
    int to_child[2], from_child[2];
    if (::pipe(to_child) < 0) throw Error(errno_text("pipe"));
    if (::pipe(from_child) < 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      throw Error(errno_text("pipe"));
    }
    pid_ = ::fork();
    if (pid_ < 0) throw Error(errno_text("fork"));
    if (pid_ == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::close(to_child[0]);
      ::close(to_child[1]);
      ::close(from_child[0]);
      ::close(from_child[1]);
      ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    ::fcntl(to_child[1], F_SETFD, FD_CLOEXEC);
    ::fcntl(from_child[0], F_SETFD, FD_CLOEXEC);
    channel_ = std::make_unique<FdChannel>(from_child[0], to_child[1]);
  }
  ~ChildProcess() override { close(); }

  void write_line(const std::string& line) override { channel_->write_line(line); }
  std::string read_line(std::chrono::milliseconds timeout) override { return channel_->read_line(timeout); }

  // Closes the pipes and reaps the child, killing it if it lingers.
  void close() override {
    if (pid_ <= 0) return;
    channel_->close();
    int status = 0;
    for (int i = 0; i < 100; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) == pid_) {
        pid_ = -1;
        return;
      }
      ::usleep(10000);
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, &status, 0);
    pid_ = -1;
  }

 private:
  pid_t pid_ = -1;
  std::unique_ptr<FdChannel> channel_;
};

}  // namespace cyclotest::mediator
