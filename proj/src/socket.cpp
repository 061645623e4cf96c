#include "gridresv/socket.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <cerrno>
#include <cstring>
#include <limits>
#include <mutex>

#include "gridresv/error.hpp"

namespace gridresv {

FileDescriptor& FileDescriptor::operator=(FileDescriptor&& other) noexcept {
  if (this != &other) {
    reset();
    fd_ = other.release();
  }
  return *this;
}

int FileDescriptor::release() noexcept {
  const int fd = fd_;
  fd_ = -1;
  return fd;
}

void FileDescriptor::reset() noexcept {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

namespace {

[[noreturn]] void transport_error(const std::string& what) {
  throw Error(ErrorCode::Transport, what + ": " + std::strerror(errno));
}

// Milliseconds for poll(), clamped to int.
int poll_timeout(Millis timeout) {
  constexpr auto kMax = Millis(std::numeric_limits<int>::max());
  return static_cast<int>(std::min(timeout, kMax).count());
}

class SocketChannel final : public Channel {
 public:
  explicit SocketChannel(FileDescriptor fd) : fd_(std::move(fd)) {
    const int one = 1;
    ::setsockopt(fd_.get(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    // A peer that stops reading must not block the sender forever.
    timeval send_timeout{30, 0};
    ::setsockopt(fd_.get(), SOL_SOCKET, SO_SNDTIMEO, &send_timeout, sizeof send_timeout);
  }

  void send_frame(std::string_view frame) override {
    std::lock_guard lock(send_mutex_);
    if (closed_) throw Error(ErrorCode::Transport, "channel closed");
    while (!frame.empty()) {
      const ssize_t n = ::send(fd_.get(), frame.data(), frame.size(), MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        // A partially written frame leaves the stream unusable.
        closed_ = true;
        ::shutdown(fd_.get(), SHUT_RDWR);
        transport_error("send");
      }
      frame.remove_prefix(static_cast<std::size_t>(n));
    }
  }

  std::optional<std::string> receive_frame(Millis timeout) override {
    using Clock = std::chrono::steady_clock;
    const auto deadline = Clock::now() + timeout;
    std::array<char, 64 * 1024> chunk{};
    while (true) {
      if (auto frame = framer_.next()) return frame;
      if (eof_) {
        framer_.finish();
        throw Error(ErrorCode::Transport, "peer closed");
      }
      const auto left = std::chrono::duration_cast<Millis>(deadline - Clock::now());
      if (left.count() < 0) return std::nullopt;
      pollfd pfd{fd_.get(), POLLIN, 0};
      const int ready = ::poll(&pfd, 1, poll_timeout(left));
      if (ready < 0) {
        if (errno == EINTR) continue;
        transport_error("poll");
      }
      if (ready == 0) return std::nullopt;
      const ssize_t n = ::recv(fd_.get(), chunk.data(), chunk.size(), 0);
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        transport_error("recv");
      }
      if (n == 0) {
        eof_ = true;
        continue;
      }
      framer_.feed(std::string_view(chunk.data(), static_cast<std::size_t>(n)));
    }
  }

  void close() override {
    std::lock_guard lock(send_mutex_);
    if (closed_) return;
    closed_ = true;
    ::shutdown(fd_.get(), SHUT_RDWR);
  }

  bool is_closed() const override { return closed_ || eof_; }

 private:
  FileDescriptor fd_;
  LineFramer framer_;
  std::mutex send_mutex_;
  std::atomic<bool> closed_ = false;
  std::atomic<bool> eof_ = false;
};

sockaddr_in resolve(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (host.empty() || host == "0.0.0.0") {
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    return addr;
  }
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) == 1) return addr;

  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  if (::getaddrinfo(host.c_str(), nullptr, &hints, &found) != 0 || found == nullptr) {
    throw Error(ErrorCode::Transport, "cannot resolve " + host);
  }
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(found->ai_addr)->sin_addr;
  ::freeaddrinfo(found);
  return addr;
}

}  // namespace

std::unique_ptr<Channel> make_socket_channel(FileDescriptor fd) {
  return std::make_unique<SocketChannel>(std::move(fd));
}

std::unique_ptr<Channel> tcp_connect(const std::string& host, std::uint16_t port) {
  const sockaddr_in addr = resolve(host, port);
  FileDescriptor fd(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!fd) transport_error("socket");
  if (::connect(fd.get(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
    transport_error("connect " + host + ":" + std::to_string(port));
  }
  return make_socket_channel(std::move(fd));
}

TcpListener::TcpListener(const std::string& host, std::uint16_t port) {
  const sockaddr_in addr = resolve(host, port);
  fd_ = FileDescriptor(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!fd_) transport_error("socket");
  const int one = 1;
  ::setsockopt(fd_.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(fd_.get(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
    transport_error("bind port " + std::to_string(port));
  }
  if (::listen(fd_.get(), 64) != 0) transport_error("listen");
  sockaddr_in bound{};
  socklen_t len = sizeof bound;
  ::getsockname(fd_.get(), reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
}

std::unique_ptr<Channel> TcpListener::accept(Millis timeout) {
  pollfd pfd{fd_.get(), POLLIN, 0};
  const int ready = ::poll(&pfd, 1, poll_timeout(timeout));
  if (ready < 0) {
    if (errno == EINTR) return nullptr;
    transport_error("poll");
  }
  if (ready == 0) return nullptr;
  FileDescriptor conn(::accept4(fd_.get(), nullptr, nullptr, SOCK_CLOEXEC));
  if (!conn) {
    if (errno == EINTR || errno == EAGAIN || errno == ECONNABORTED) return nullptr;
    transport_error("accept");
  }
  return make_socket_channel(std::move(conn));
}

}  // namespace gridresv
