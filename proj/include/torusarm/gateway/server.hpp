#pragma once

// TCP session host (POSIX sockets): one thread and one SessionEngine per
// connection, commands applied in arrival order and timestamped on arrival
// relative to the connection's start.

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <list>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "torusarm/error.hpp"
#include "torusarm/gateway/engine.hpp"
#include "torusarm/gateway/protocol.hpp"

namespace torusarm::gateway {

struct ServerConfig {
  std::string bind_address = "127.0.0.1";
  std::uint16_t port = 7878;  // 0: ephemeral
  EngineConfig engine{};
  std::filesystem::path log_dir;  // command log per session, written on disconnect
};

namespace detail {

inline bool send_all(int fd, std::string_view bytes) {
  while (!bytes.empty()) {
    const ssize_t k = ::send(fd, bytes.data(), bytes.size(), MSG_NOSIGNAL);
    if (k < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    bytes.remove_prefix(static_cast<std::size_t>(k));
  }
  return true;
}

}  // namespace detail

class Server {
 public:
  explicit Server(ServerConfig config) : config_(std::move(config)) {}
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;
  ~Server() { stop(); }

  /// Binds and starts accepting in the background. Throws Io on bind failure.
  void start() {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw Error(ErrorCode::Io, std::string("socket: ") + std::strerror(errno));
    const int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(config_.port);
    if (::inet_pton(AF_INET, config_.bind_address.c_str(), &addr.sin_addr) != 1) {
      close_listener();
      throw Error(ErrorCode::InvalidArgument, "bad bind address '" + config_.bind_address + "'");
    }
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listen_fd_, 16) != 0) {
      const std::string why = std::strerror(errno);
      close_listener();
      throw Error(ErrorCode::Io, "cannot listen on " + config_.bind_address + ":" + std::to_string(config_.port) + ": " + why);
    }
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    running_ = true;
    acceptor_ = std::thread([this] { accept_loop(); });
  }

  std::uint16_t port() const { return port_; }

  /// Blocks until stop() is called from another thread.
  void wait() {
    if (acceptor_.joinable()) acceptor_.join();
  }

  void stop() {
    if (!running_.exchange(false)) return;
    if (acceptor_.joinable()) acceptor_.join();
    close_listener();
    std::list<std::thread> workers;
    {
      std::lock_guard lock(mutex_);
      for (const int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
      workers.swap(workers_);
    }
    for (auto& w : workers) w.join();
  }

  std::size_t sessions_served() const { return sessions_.load(); }

 private:
  void close_listener() {
    if (listen_fd_ >= 0) ::close(listen_fd_);
    listen_fd_ = -1;
  }

  void accept_loop() {
    while (running_) {
      pollfd p{listen_fd_, POLLIN, 0};
      const int ready = ::poll(&p, 1, 100);
      if (ready <= 0) continue;
      const int fd = ::accept(listen_fd_, nullptr, nullptr);
      if (fd < 0) continue;
      const int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      const std::size_t id = ++sessions_;
      std::lock_guard lock(mutex_);
      open_fds_.push_back(fd);
      workers_.emplace_back([this, fd, id] { serve_connection(fd, id); });
    }
  }

  void serve_connection(int fd, std::size_t id) {
    SessionEngine engine(config_.engine);
    FrameDecoder decoder;
    const auto t0 = std::chrono::steady_clock::now();
    char buf[8192];
    bool alive = true;
    while (alive) {
      const ssize_t k = ::recv(fd, buf, sizeof buf, 0);
      if (k < 0 && errno == EINTR) continue;
      if (k <= 0) break;
      decoder.feed({buf, static_cast<std::size_t>(k)});
      while (auto item = decoder.next()) {
        const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::vector<json> events;
        if (item->error) {
          events.push_back(error_event(ErrorCode::ParseError, *item->error));
        } else {
          events = engine.handle_payload(item->payload, t);
        }
        std::string out;
        for (const auto& e : events) out += encode_frame(e);
        if (!out.empty() && !detail::send_all(fd, out)) {
          alive = false;
          break;
        }
      }
    }
    if (!config_.log_dir.empty()) {
      std::error_code ec;
      std::filesystem::create_directories(config_.log_dir, ec);
      std::ofstream(config_.log_dir / ("session-" + std::to_string(id) + ".log")) << engine.command_log_text();
    }
    std::lock_guard lock(mutex_);
    open_fds_.remove(fd);
    ::close(fd);
  }

  ServerConfig config_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> running_{false};
  std::atomic<std::size_t> sessions_{0};
  std::thread acceptor_;
  std::mutex mutex_;
  std::list<int> open_fds_;
  std::list<std::thread> workers_;
};

/// Blocking client, mainly for tests and scripted operators.
class Client {
 public:
  Client(const std::string& host, std::uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw Error(ErrorCode::Io, "socket failed");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1 ||
        ::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
      ::close(fd_);
      throw Error(ErrorCode::Io, "cannot connect to " + host + ":" + std::to_string(port));
    }
    const int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  }
  Client(const Client&) = delete;
  Client& operator=(const Client&) = delete;
  ~Client() {
    if (fd_ >= 0) ::close(fd_);
  }

  void send(const json& message) { send_raw(encode_frame(message)); }

  void send_raw(std::string_view bytes) {
    if (!detail::send_all(fd_, bytes)) throw Error(ErrorCode::Io, "send failed");
  }

  /// Next event, or nothing if none arrives within the timeout.
  std::optional<json> receive(std::chrono::milliseconds timeout = std::chrono::milliseconds(5000)) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (true) {
      if (auto item = decoder_.next()) {
        if (item->error) throw Error(ErrorCode::ParseError, *item->error);
        return json::parse(item->payload);
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) return std::nullopt;
      pollfd p{fd_, POLLIN, 0};
      if (::poll(&p, 1, static_cast<int>(left.count())) <= 0) return std::nullopt;
      char buf[8192];
      const ssize_t k = ::recv(fd_, buf, sizeof buf, 0);
      if (k <= 0) return std::nullopt;
      decoder_.feed({buf, static_cast<std::size_t>(k)});
    }
  }

  /// Skips events until one of the given type arrives.
  std::optional<json> receive_type(std::string_view type,
                                   std::chrono::milliseconds timeout = std::chrono::milliseconds(5000)) {
    while (auto e = receive(timeout)) {
      if ((*e)["type"] == type) return e;
    }
    return std::nullopt;
  }

 private:
  int fd_ = -1;
  FrameDecoder decoder_;
};

}  // namespace torusarm::gateway
