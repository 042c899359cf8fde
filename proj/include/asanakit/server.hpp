#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstdint>
#include <cstring>
#include <list>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "asanakit/error.hpp"
#include "asanakit/session.hpp"

namespace asanakit {

namespace net {

inline void send_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const auto n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::IoError, std::string("send: ") + std::strerror(errno));
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

/// Buffered reads over a connected socket.
class Reader {
 public:
  explicit Reader(int fd) : fd_(fd) {}

  /// Appends at least one byte to the buffer; false on EOF or error.
  bool fill() {
    char chunk[4096];
    for (;;) {
      const auto n = ::recv(fd_, chunk, sizeof chunk, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) return false;
      buffer_.append(chunk, static_cast<std::size_t>(n));
      return true;
    }
  }

  std::optional<std::string> read_until(std::string_view delim) {
    for (;;) {
      const auto pos = buffer_.find(delim);
      if (pos != std::string::npos) {
        std::string out = buffer_.substr(0, pos);
        buffer_.erase(0, pos + delim.size());
        return out;
      }
      if (!fill()) return std::nullopt;
    }
  }

  std::optional<std::string> read_exact(std::size_t n) {
    while (buffer_.size() < n)
      if (!fill()) return std::nullopt;
    std::string out = buffer_.substr(0, n);
    buffer_.erase(0, n);
    return out;
  }

  /// Looks at the first n buffered bytes without consuming them.
  std::optional<std::string> peek(std::size_t n) {
    while (buffer_.size() < n)
      if (!fill()) return buffer_.empty() ? std::nullopt : std::optional<std::string>(buffer_);
    return buffer_.substr(0, n);
  }

 private:
  int fd_;
  std::string buffer_;
};

}  // namespace net

namespace ws {

inline std::string accept_key(std::string_view client_key) {
  static constexpr std::string_view kGuid = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";
  std::string in(client_key);
  in += kGuid;
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(in.data()), in.size(), digest);
  unsigned char b64[4 * ((SHA_DIGEST_LENGTH + 2) / 3) + 1];
  const int len = EVP_EncodeBlock(b64, digest, SHA_DIGEST_LENGTH);
  return std::string(reinterpret_cast<char*>(b64), static_cast<std::size_t>(len));
}

enum Opcode : std::uint8_t { Continuation = 0x0, Text = 0x1, Binary = 0x2, Close = 0x8, Ping = 0x9, Pong = 0xA };

struct Frame {
  bool fin = true;
  std::uint8_t opcode = Text;
  std::string payload;
};

/// Encodes one frame. Clients must mask; servers must not.
inline std::string encode(std::string_view payload, std::uint8_t opcode, std::optional<std::uint32_t> mask = {}) {
  std::string out;
  out.push_back(static_cast<char>(0x80 | opcode));
  const std::uint8_t mask_bit = mask ? 0x80 : 0;
  const auto n = payload.size();
  if (n < 126) {
    out.push_back(static_cast<char>(mask_bit | n));
  } else if (n <= 0xFFFF) {
    out.push_back(static_cast<char>(mask_bit | 126));
    out.push_back(static_cast<char>(n >> 8));
    out.push_back(static_cast<char>(n & 0xFF));
  } else {
    out.push_back(static_cast<char>(mask_bit | 127));
    for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<char>((n >> shift) & 0xFF));
  }
  if (!mask) {
    out.append(payload);
    return out;
  }
  unsigned char key[4] = {static_cast<unsigned char>(*mask >> 24), static_cast<unsigned char>(*mask >> 16),
                          static_cast<unsigned char>(*mask >> 8), static_cast<unsigned char>(*mask)};
  out.append(reinterpret_cast<char*>(key), 4);
  for (std::size_t i = 0; i < n; ++i) out.push_back(static_cast<char>(payload[i] ^ key[i % 4]));
  return out;
}

inline constexpr std::uint64_t kMaxPayload = 1 << 24;

inline std::optional<Frame> read_frame(net::Reader& in) {
  auto head = in.read_exact(2);
  if (!head) return std::nullopt;
  Frame f;
  const auto b0 = static_cast<std::uint8_t>((*head)[0]);
  const auto b1 = static_cast<std::uint8_t>((*head)[1]);
  f.fin = b0 & 0x80;
  f.opcode = b0 & 0x0F;
  std::uint64_t len = b1 & 0x7F;
  if (len >= 126) {
    auto ext = in.read_exact(len == 126 ? 2 : 8);
    if (!ext) return std::nullopt;
    len = 0;
    for (char c : *ext) len = (len << 8) | static_cast<std::uint8_t>(c);
  }
  if (len > kMaxPayload) return std::nullopt;
  std::string key;
  if (b1 & 0x80) {
    auto k = in.read_exact(4);
    if (!k) return std::nullopt;
    key = *k;
  }
  auto payload = in.read_exact(static_cast<std::size_t>(len));
  if (!payload) return std::nullopt;
  if (!key.empty())
    for (std::size_t i = 0; i < payload->size(); ++i) (*payload)[i] ^= key[i % 4];
  f.payload = std::move(*payload);
  return f;
}

inline std::optional<std::string> header_value(const std::string& request, std::string_view name) {
  std::size_t pos = 0;
  while ((pos = request.find("\r\n", pos)) != std::string::npos) {
    pos += 2;
    const auto colon = request.find(':', pos);
    const auto eol = request.find("\r\n", pos);
    if (colon == std::string::npos || (eol != std::string::npos && colon > eol)) continue;
    std::string key = request.substr(pos, colon - pos);
    if (key.size() != name.size() ||
        !std::equal(key.begin(), key.end(), name.begin(),
                    [](char a, char b) { return std::tolower(a) == std::tolower(b); }))
      continue;
    std::string value = request.substr(colon + 1, (eol == std::string::npos ? request.size() : eol) - colon - 1);
    const auto first = value.find_first_not_of(" \t");
    const auto last = value.find_last_not_of(" \t");
    return first == std::string::npos ? std::string() : value.substr(first, last - first + 1);
  }
  return std::nullopt;
}

}  // namespace ws

/// TCP endpoint for wire protocol v1. Each connection carries newline-
/// delimited JSON, either raw or inside WebSocket text frames when the
/// connection opens with an HTTP upgrade request.
class SessionServer {
 public:
  explicit SessionServer(SessionManager& manager, std::string host = "127.0.0.1", std::uint16_t port = 0)
      : manager_(manager), host_(std::move(host)), requested_port_(port) {}

  ~SessionServer() { stop(); }

  SessionServer(const SessionServer&) = delete;
  SessionServer& operator=(const SessionServer&) = delete;

  /// Binds and starts accepting; returns the bound port.
  std::uint16_t start() {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw Error(ErrorCode::IoError, std::string("socket: ") + std::strerror(errno));
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(requested_port_);
    if (::inet_pton(AF_INET, host_.c_str(), &addr.sin_addr) != 1) {
      ::close(listen_fd_);
      throw Error(ErrorCode::IoError, "bad listen address '" + host_ + "'");
    }
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(listen_fd_, 64) < 0) {
      const std::string why = std::strerror(errno);
      ::close(listen_fd_);
      listen_fd_ = -1;
      throw Error(ErrorCode::IoError, "cannot listen on " + host_ + ":" + std::to_string(requested_port_) + ": " + why);
    }
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    running_ = true;
    acceptor_ = std::thread([this] { accept_loop(); });
    return port_;
  }

  std::uint16_t port() const { return port_; }

  void stop() {
    if (!running_.exchange(false)) return;
    if (acceptor_.joinable()) acceptor_.join();
    ::close(listen_fd_);
    listen_fd_ = -1;
    std::list<Connection> conns;
    {
      std::lock_guard lock(mutex_);
      for (auto& c : connections_) ::shutdown(c.fd, SHUT_RDWR);
      conns.swap(connections_);
    }
    for (auto& c : conns) {
      if (c.thread.joinable()) c.thread.join();
      ::close(c.fd);  // closed only after the thread is gone, so the fd is never reused early
    }
  }

 private:
  struct Connection {
    int fd = -1;
    std::thread thread;
    std::shared_ptr<std::atomic<bool>> done = std::make_shared<std::atomic<bool>>(false);
  };

  void accept_loop() {
    while (running_) {
      pollfd p{listen_fd_, POLLIN, 0};
      const int ready = ::poll(&p, 1, 100);
      reap();
      if (ready <= 0) continue;
      const int fd = ::accept(listen_fd_, nullptr, nullptr);
      if (fd < 0) continue;
      int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      std::lock_guard lock(mutex_);
      auto& c = connections_.emplace_back();
      c.fd = fd;
      c.thread = std::thread([this, fd, done = c.done] {
        serve_connection(fd);
        *done = true;
      });
    }
  }

  void reap() {
    std::lock_guard lock(mutex_);
    for (auto it = connections_.begin(); it != connections_.end();) {
      if (*it->done) {
        it->thread.join();
        ::close(it->fd);
        it = connections_.erase(it);
      } else {
        ++it;
      }
    }
  }

  void serve_connection(int fd) {
    ProtocolHandler handler(manager_);
    net::Reader in(fd);
    try {
      const auto head = in.peek(4);
      if (!head) return;
      if (*head == "GET ")
        serve_websocket(fd, in, handler);
      else
        serve_lines(fd, in, handler);
    } catch (const Error&) {
      // peer went away mid-write
    }
    handler.disconnect();
  }

  static void serve_lines(int fd, net::Reader& in, ProtocolHandler& handler) {
    while (auto line = in.read_until("\n")) {
      if (!line->empty() && line->back() == '\r') line->pop_back();
      if (line->empty()) continue;
      net::send_all(fd, handler.handle_line(*line) + "\n");
    }
  }

  static void serve_websocket(int fd, net::Reader& in, ProtocolHandler& handler) {
    auto request = in.read_until("\r\n\r\n");
    if (!request) return;
    const auto key = ws::header_value(*request, "Sec-WebSocket-Key");
    if (!key) {
      net::send_all(fd, "HTTP/1.1 400 Bad Request\r\nContent-Length: 0\r\nConnection: close\r\n\r\n");
      return;
    }
    net::send_all(fd,
                  "HTTP/1.1 101 Switching Protocols\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
                  "Sec-WebSocket-Accept: " + ws::accept_key(*key) + "\r\n\r\n");
    std::string message;
    while (auto frame = ws::read_frame(in)) {
      switch (frame->opcode) {
        case ws::Ping:
          net::send_all(fd, ws::encode(frame->payload, ws::Pong));
          continue;
        case ws::Pong:
          continue;
        case ws::Close:
          net::send_all(fd, ws::encode(frame->payload.substr(0, 2), ws::Close));
          return;
        default:
          message += frame->payload;
      }
      if (!frame->fin) continue;
      std::size_t start = 0;
      while (start < message.size()) {
        auto end = message.find('\n', start);
        if (end == std::string::npos) end = message.size();
        std::string_view line(message.data() + start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) net::send_all(fd, ws::encode(handler.handle_line(line), ws::Text));
        start = end + 1;
      }
      message.clear();
    }
  }

  SessionManager& manager_;
  std::string host_;
  std::uint16_t requested_port_;
  std::uint16_t port_ = 0;
  int listen_fd_ = -1;
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  std::mutex mutex_;
  std::list<Connection> connections_;
};

/// Blocking NDJSON client, used by tests and the replay tool.
class LineClient {
 public:
  LineClient(const std::string& host, std::uint16_t port) : fd_(::socket(AF_INET, SOCK_STREAM, 0)), in_(fd_) {
    if (fd_ < 0) throw Error(ErrorCode::IoError, "socket failed");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    ::inet_pton(AF_INET, host.c_str(), &addr.sin_addr);
    if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
      ::close(fd_);
      throw Error(ErrorCode::IoError, "cannot connect to " + host + ":" + std::to_string(port));
    }
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  }
  ~LineClient() { close(); }

  LineClient(const LineClient&) = delete;
  LineClient& operator=(const LineClient&) = delete;

  void send_line(std::string_view line) { net::send_all(fd_, std::string(line) + "\n"); }

  std::optional<std::string> read_line() { return in_.read_until("\n"); }

  std::string request(std::string_view line) {
    send_line(line);
    auto reply = read_line();
    if (!reply) throw Error(ErrorCode::IoError, "connection closed by server");
    return *reply;
  }

  void close() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_;
  net::Reader in_;
};

}  // namespace asanakit
