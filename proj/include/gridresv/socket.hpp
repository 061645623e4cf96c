#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "gridresv/channel.hpp"

namespace gridresv {

/// Owns a POSIX file descriptor.
class FileDescriptor {
 public:
  FileDescriptor() = default;
  explicit FileDescriptor(int fd) : fd_(fd) {}
  FileDescriptor(FileDescriptor&& other) noexcept : fd_(other.release()) {}
  FileDescriptor& operator=(FileDescriptor&& other) noexcept;
  FileDescriptor(const FileDescriptor&) = delete;
  FileDescriptor& operator=(const FileDescriptor&) = delete;
  ~FileDescriptor() { reset(); }

  int get() const noexcept { return fd_; }
  explicit operator bool() const noexcept { return fd_ >= 0; }
  int release() noexcept;
  void reset() noexcept;

 private:
  int fd_ = -1;
};

/// Line-framed channel over a connected TCP stream.
std::unique_ptr<Channel> make_socket_channel(FileDescriptor fd);

/// Connects to host:port. Throws Error(Transport) on failure.
std::unique_ptr<Channel> tcp_connect(const std::string& host, std::uint16_t port);

class TcpListener {
 public:
  /// Binds and listens; port 0 picks an ephemeral port. Throws
  /// Error(Transport) on bind failure.
  TcpListener(const std::string& host, std::uint16_t port);

  std::uint16_t port() const noexcept { return port_; }

  /// Accepted connection, or nullptr if none arrived within `timeout`.
  std::unique_ptr<Channel> accept(Millis timeout);

 private:
  FileDescriptor fd_;
  std::uint16_t port_ = 0;
};

}  // namespace gridresv
