#pragma once

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "lcpa/error.hpp"
#include "lcpa/wire.hpp"

namespace lcpa {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  // "host:port"
  static Endpoint parse(const std::string& text) {
    const auto colon = text.rfind(':');
    if (colon == std::string::npos) throw ParameterError("endpoint", "expected host:port, got '" + text + "'");
    Endpoint e;
    e.host = text.substr(0, colon);
    if (e.host.empty()) e.host = "127.0.0.1";
    try {
      const unsigned long port = std::stoul(text.substr(colon + 1));
      if (port > 65535) throw std::out_of_range("port");
      e.port = static_cast<std::uint16_t>(port);
    } catch (const std::exception&) {
      throw ParameterError("endpoint", "bad port in '" + text + "'");
    }
    return e;
  }

  std::string str() const { return host + ":" + std::to_string(port); }
};

class FileDescriptor {
 public:
  FileDescriptor() = default;
  explicit FileDescriptor(int fd) : fd_(fd) {}
  ~FileDescriptor() { reset(); }
  FileDescriptor(FileDescriptor&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  FileDescriptor& operator=(FileDescriptor&& other) noexcept {
    if (this != &other) {
      reset();
      fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
  }
  FileDescriptor(const FileDescriptor&) = delete;
  FileDescriptor& operator=(const FileDescriptor&) = delete;

  int get() const noexcept { return fd_; }
  bool valid() const noexcept { return fd_ >= 0; }
  void reset() noexcept {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

inline std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

// Reliable byte stream carrying whole frames.
class Channel {
 public:
  explicit Channel(FileDescriptor fd) : fd_(std::move(fd)) {}

  void send_frame(const wire::Frame& f) { write_all(wire::encode_frame(f)); }

  wire::Frame recv_frame() {
    std::uint8_t header[wire::frame_header_size];
    read_exact(header);
    wire::Frame f;
    const std::uint32_t len = wire::decode_header(header, f.type);
    f.payload.resize(len);
    read_exact(f.payload);
    return f;
  }

  void write_all(std::span<const std::uint8_t> bytes) {
    std::size_t done = 0;
    while (done < bytes.size()) {
      const ssize_t n = ::send(fd_.get(), bytes.data() + done, bytes.size() - done, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw TransportError(errno_text("send"));
      }
      done += static_cast<std::size_t>(n);
    }
  }

  void read_exact(std::span<std::uint8_t> bytes) {
    std::size_t done = 0;
    while (done < bytes.size()) {
      const ssize_t n = ::recv(fd_.get(), bytes.data() + done, bytes.size() - done, 0);
      if (n == 0) throw TransportError("peer closed the connection");
      if (n < 0) {
        if (errno == EINTR) continue;
        throw TransportError(errno_text("recv"));
      }
      done += static_cast<std::size_t>(n);
    }
  }

  // Connected pair of local stream sockets.
  static std::pair<Channel, Channel> pair() {
    int fds[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0) throw TransportError(errno_text("socketpair"));
    return {Channel(FileDescriptor(fds[0])), Channel(FileDescriptor(fds[1]))};
  }

 private:
  FileDescriptor fd_;
};

namespace detail {

inline sockaddr_in resolve(const Endpoint& e) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (const int rc = ::getaddrinfo(e.host.c_str(), nullptr, &hints, &res); rc != 0) {
    throw TransportError("cannot resolve " + e.host + ": " + ::gai_strerror(rc));
  }
  sockaddr_in addr = *reinterpret_cast<sockaddr_in*>(res->ai_addr);
  ::freeaddrinfo(res);
  addr.sin_port = htons(e.port);
  return addr;
}

}  // namespace detail

class Listener {
 public:
  // Port 0 binds an ephemeral port; see port().
  explicit Listener(const Endpoint& at) {
    fd_ = FileDescriptor(::socket(AF_INET, SOCK_STREAM, 0));
    if (!fd_.valid()) throw TransportError(errno_text("socket"));
    const int one = 1;
    ::setsockopt(fd_.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr = detail::resolve(at);
    if (::bind(fd_.get(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
      throw TransportError(errno_text(("bind " + at.str()).c_str()));
    }
    if (::listen(fd_.get(), 4) != 0) throw TransportError(errno_text("listen"));
    socklen_t len = sizeof(addr);
    ::getsockname(fd_.get(), reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
  }

  std::uint16_t port() const noexcept { return port_; }

  Channel accept() {
    for (;;) {
      const int fd = ::accept(fd_.get(), nullptr, nullptr);
      if (fd >= 0) return Channel(FileDescriptor(fd));
      if (errno != EINTR) throw TransportError(errno_text("accept"));
    }
  }

 private:
  FileDescriptor fd_;
  std::uint16_t port_ = 0;
};

// Retries refused connections until `patience` runs out, so the two roles
// can be started in either order.
inline Channel connect_to(const Endpoint& e, std::chrono::milliseconds patience = std::chrono::seconds(10)) {
  const auto deadline = std::chrono::steady_clock::now() + patience;
  const sockaddr_in addr = detail::resolve(e);
  for (;;) {
    FileDescriptor fd(::socket(AF_INET, SOCK_STREAM, 0));
    if (!fd.valid()) throw TransportError(errno_text("socket"));
    if (::connect(fd.get(), reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) == 0) {
      const int one = 1;
      ::setsockopt(fd.get(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      return Channel(std::move(fd));
    }
    if ((errno != ECONNREFUSED && errno != EINTR) || std::chrono::steady_clock::now() >= deadline) {
      throw TransportError(errno_text(("connect " + e.str()).c_str()));
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
}

}  // namespace lcpa
