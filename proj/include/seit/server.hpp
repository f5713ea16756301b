#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "seit/manager.hpp"

namespace seit {

struct ListenAddress {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
};

// "host:port" or ":port"; throws InvalidParameter.
ListenAddress parse_listen_address(const std::string& text);

// Serves the manager over TCP: newline-delimited JSON frames, one thread per
// connection, every message handled under one lock so mutations are totally
// ordered. Ticks are whole seconds since start().
class ManagerServer {
 public:
  explicit ManagerServer(Manager manager, ListenAddress address = {});
  ~ManagerServer();
  ManagerServer(const ManagerServer&) = delete;
  ManagerServer& operator=(const ManagerServer&) = delete;

  void start();  // throws std::system_error when binding fails
  void stop();
  std::uint16_t port() const noexcept { return port_; }

  // Blocks until stop() is called from another thread or a signal handler
  // sets `stop_flag`.
  void wait(const std::atomic<bool>& stop_flag);

  Manager snapshot() const;

  static constexpr std::size_t kMaxFrameBytes = 1 << 20;

 private:
  struct Connection;

  void accept_loop();
  void serve(std::shared_ptr<Connection> conn);
  void dispatch(Connection& conn, const std::string& line);
  Tick now() const;

  mutable std::mutex mutex_;
  Manager manager_;
  ListenAddress address_;
  std::uint16_t port_ = 0;
  int listen_fd_ = -1;
  std::atomic<bool> running_{false};
  std::chrono::steady_clock::time_point started_;
  std::thread acceptor_;
  std::vector<std::thread> workers_;
  std::vector<std::shared_ptr<Connection>> connections_;
  std::map<TenantId, std::shared_ptr<Connection>> sessions_;
};

}  // namespace seit
