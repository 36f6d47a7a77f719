#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "socnav/errors.hpp"

namespace socnav {

enum class ReadStatus { line, timeout, closed };

struct ReadResult {
  ReadStatus status = ReadStatus::closed;
  std::string line;  // without the trailing newline
};

/// A bidirectional message stream carrying one protocol line per message.
class Connection {
 public:
  virtual ~Connection() = default;
  /// Negative timeout blocks until a line arrives or the peer closes.
  virtual ReadResult read_line(std::chrono::milliseconds timeout = std::chrono::milliseconds(-1)) = 0;
  /// Sends one message; `line` may carry a trailing newline. Returns false
  /// once the connection is broken. Safe to call from several threads.
  virtual bool write_line(const std::string& line) = 0;
  /// Wakes blocked readers and closes the socket.
  virtual void close() = 0;
};

class PortInUse : public RuntimeError {
 public:
  using RuntimeError::RuntimeError;
};

/// Listening TCP socket on all interfaces. Port 0 picks an ephemeral port.
class Listener {
 public:
  explicit Listener(std::uint16_t port);
  ~Listener();
  Listener(const Listener&) = delete;
  Listener& operator=(const Listener&) = delete;

  std::uint16_t port() const { return port_; }
  /// Accepted socket fd, or -1 on timeout.
  int accept(std::chrono::milliseconds timeout);

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

/// Wraps an accepted socket. Plain clients get newline framing; an HTTP
/// GET with a websocket upgrade gets websocket framing; any other GET under
/// /ui is answered from `ui_dir` and yields nullptr.
std::unique_ptr<Connection> open_server_connection(int fd, const std::optional<std::filesystem::path>& ui_dir);

/// Newline-framed client connection, used by tests and scripted clients.
std::unique_ptr<Connection> connect_tcp(const std::string& host, std::uint16_t port);

/// Websocket client connection, used by tests.
std::unique_ptr<Connection> connect_websocket(const std::string& host, std::uint16_t port,
                                              const std::string& path = "/");

/// Sec-WebSocket-Accept value for a client key.
std::string websocket_accept_key(const std::string& client_key);

/// Result of a one-shot HTTP GET (status code and body).
struct HttpResponse {
  int status = 0;
  std::string content_type;
  std::string body;
};
HttpResponse http_get(const std::string& host, std::uint16_t port, const std::string& path);

}  // namespace socnav
