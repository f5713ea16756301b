#include "seit/server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <system_error>

#include "seit/error.hpp"

namespace seit {

struct ManagerServer::Connection {
  int fd = -1;
  std::optional<TenantId> tenant;
  bool open = true;

  void send_line(const std::string& frame) {
    if (!open) return;
    std::string line = frame + "\n";
    std::size_t sent = 0;
    while (sent < line.size()) {
      const ssize_t n = ::send(fd, line.data() + sent, line.size() - sent, MSG_NOSIGNAL);
      if (n <= 0) {
        if (n < 0 && errno == EINTR) continue;
        open = false;
        return;
      }
      sent += static_cast<std::size_t>(n);
    }
  }
};

ListenAddress parse_listen_address(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos) {
    throw Error(ErrorCode::InvalidParameter, "listen address must be host:port");
  }
  ListenAddress addr;
  if (colon > 0) addr.host = text.substr(0, colon);
  const std::string port = text.substr(colon + 1);
  unsigned value = 0;
  auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
  if (ec != std::errc{} || ptr != port.data() + port.size() || value > 65535 || port.empty()) {
    throw Error(ErrorCode::InvalidParameter, "bad port '" + port + "'");
  }
  addr.port = static_cast<std::uint16_t>(value);
  return addr;
}

ManagerServer::ManagerServer(Manager manager, ListenAddress address)
    : manager_(std::move(manager)), address_(std::move(address)) {}

ManagerServer::~ManagerServer() { stop(); }

void ManagerServer::start() {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw std::system_error(errno, std::generic_category(), "socket");
  const int yes = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(address_.port);
  if (::inet_pton(AF_INET, address_.host.c_str(), &sa.sin_addr) != 1) {
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw Error(ErrorCode::InvalidParameter, "bad IPv4 address '" + address_.host + "'");
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&sa), sizeof sa) < 0 ||
      ::listen(listen_fd_, 64) < 0) {
    const int err = errno;
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw std::system_error(err, std::generic_category(), "bind/listen");
  }
  socklen_t len = sizeof sa;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&sa), &len);
  port_ = ntohs(sa.sin_port);
  started_ = std::chrono::steady_clock::now();
  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
}

void ManagerServer::stop() {
  if (!running_.exchange(false)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  if (acceptor_.joinable()) acceptor_.join();
  {
    std::lock_guard lock(mutex_);
    for (auto& c : connections_) ::shutdown(c->fd, SHUT_RDWR);
  }
  for (auto& w : workers_) {
    if (w.joinable()) w.join();
  }
  workers_.clear();
  connections_.clear();
  sessions_.clear();
}

void ManagerServer::wait(const std::atomic<bool>& stop_flag) {
  while (running_ && !stop_flag) std::this_thread::sleep_for(std::chrono::milliseconds(100));
}

Manager ManagerServer::snapshot() const {
  std::lock_guard lock(mutex_);
  return manager_;
}

Tick ManagerServer::now() const {
  return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::steady_clock::now() - started_)
      .count();
}

void ManagerServer::accept_loop() {
  while (running_) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      return;
    }
    auto conn = std::make_shared<Connection>();
    conn->fd = fd;
    std::lock_guard lock(mutex_);
    if (!running_) {
      ::close(fd);
      return;
    }
    connections_.push_back(conn);
    workers_.emplace_back([this, conn] { serve(conn); });
  }
}

void ManagerServer::serve(std::shared_ptr<Connection> conn) {
  std::string buffer;
  char chunk[4096];
  while (true) {
    const ssize_t n = ::recv(conn->fd, chunk, sizeof chunk, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t start = 0;
    for (std::size_t nl; (nl = buffer.find('\n', start)) != std::string::npos; start = nl + 1) {
      dispatch(*conn, buffer.substr(start, nl - start));
    }
    buffer.erase(0, start);
    if (buffer.size() > kMaxFrameBytes) {
      std::lock_guard lock(mutex_);
      conn->send_line(protocol::encode(protocol::ErrorMsg{
          std::string(to_string(ErrorCode::MalformedFrame)), "frame too long", std::nullopt}));
      break;
    }
  }
  std::lock_guard lock(mutex_);
  conn->open = false;
  if (conn->tenant) {
    auto it = sessions_.find(*conn->tenant);
    if (it != sessions_.end() && it->second == conn) sessions_.erase(it);
  }
  ::close(conn->fd);
}

void ManagerServer::dispatch(Connection& conn, const std::string& line) {
  if (line.empty() || line == "\r") return;
  std::lock_guard lock(mutex_);
  std::optional<protocol::Message> decoded;
  try {
    decoded = protocol::decode(line);
  } catch (const Error&) {
    // handle_frame produces the error reply.
  }
  const auto deliveries = manager_.handle_frame(conn.tenant, line, now());
  if (decoded) {
    if (const auto* reg = std::get_if<protocol::Register>(&*decoded)) {
      const bool failed = !deliveries.empty() &&
                          std::holds_alternative<protocol::ErrorMsg>(deliveries.front().message);
      if (!failed) {
        conn.tenant = reg->tenant;
        for (auto& c : connections_) {
          if (c.get() == &conn) sessions_[reg->tenant] = c;
        }
      }
    }
  }
  for (const Delivery& d : deliveries) {
    const std::string frame = protocol::encode(d.message);
    if (!d.to || (conn.tenant && *d.to == *conn.tenant)) {
      conn.send_line(frame);
    } else if (auto it = sessions_.find(*d.to); it != sessions_.end()) {
      it->second->send_line(frame);
    }
  }
}

}  // namespace seit
