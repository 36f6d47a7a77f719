#include "socnav/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <openssl/evp.h>
#include <openssl/sha.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

namespace socnav {

namespace {

using Clock = std::chrono::steady_clock;
constexpr std::size_t kMaxMessage = 16u << 20;
constexpr std::size_t kMaxHeader = 64u << 10;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool send_all(int fd, const char* data, std::size_t n) {
  while (n > 0) {
    const ssize_t k = ::send(fd, data, n, MSG_NOSIGNAL);
    if (k < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data += k;
    n -= static_cast<std::size_t>(k);
  }
  return true;
}

/// Socket plus receive buffer with deadline-aware reads.
class FdStream {
 public:
  FdStream(int fd, std::string buffered) : fd_(fd), buf_(std::move(buffered)) {}
  ~FdStream() {
    if (fd_ >= 0) ::close(fd_);
  }
  FdStream(const FdStream&) = delete;
  FdStream& operator=(const FdStream&) = delete;

  int fd() const { return fd_; }
  std::string& buffer() { return buf_; }
  bool eof() const { return eof_; }

  /// Reads more bytes into the buffer. Returns false on timeout or EOF.
  bool fill(std::optional<Clock::time_point> deadline) {
    if (eof_ || closed_) {
      eof_ = true;
      return false;
    }
    int wait_ms = -1;
    if (deadline) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(*deadline - Clock::now()).count();
      if (left <= 0) return false;
      wait_ms = static_cast<int>(std::min<long long>(left, 1 << 30));
    }
    pollfd p{fd_, POLLIN, 0};
    const int r = ::poll(&p, 1, wait_ms);
    if (r < 0) {
      if (errno == EINTR) return false;
      eof_ = true;
      return false;
    }
    if (r == 0) return false;
    std::array<char, 65536> chunk;
    const ssize_t k = ::recv(fd_, chunk.data(), chunk.size(), 0);
    if (k <= 0) {
      if (k < 0 && errno == EINTR) return false;
      eof_ = true;
      return false;
    }
    buf_.append(chunk.data(), static_cast<std::size_t>(k));
    return true;
  }

  bool write(const std::string& bytes) {
    std::lock_guard lock(write_mutex_);
    if (closed_) return false;
    return send_all(fd_, bytes.data(), bytes.size());
  }

  void close() {
    closed_ = true;
    ::shutdown(fd_, SHUT_RDWR);
  }

 private:
  int fd_;
  std::string buf_;
  bool eof_ = false;
  std::atomic<bool> closed_{false};
  std::mutex write_mutex_;
};

std::optional<Clock::time_point> deadline_for(std::chrono::milliseconds timeout) {
  if (timeout.count() < 0) return std::nullopt;
  return Clock::now() + timeout;
}

class LineConnection : public Connection {
 public:
  LineConnection(int fd, std::string buffered) : stream_(fd, std::move(buffered)) {}

  ReadResult read_line(std::chrono::milliseconds timeout) override {
    const auto deadline = deadline_for(timeout);
    for (;;) {
      auto& b = stream_.buffer();
      const auto nl = b.find('\n');
      if (nl != std::string::npos) {
        ReadResult r{ReadStatus::line, b.substr(0, nl)};
        if (!r.line.empty() && r.line.back() == '\r') r.line.pop_back();
        b.erase(0, nl + 1);
        return r;
      }
      if (b.size() > kMaxMessage) return {ReadStatus::closed, {}};
      if (!stream_.fill(deadline)) {
        if (stream_.eof()) return {ReadStatus::closed, {}};
        if (deadline && Clock::now() >= *deadline) return {ReadStatus::timeout, {}};
      }
    }
  }

  bool write_line(const std::string& line) override {
    if (!line.empty() && line.back() == '\n') return stream_.write(line);
    return stream_.write(line + '\n');
  }

  void close() override { stream_.close(); }

 private:
  FdStream stream_;
};

enum : unsigned char { kOpContinuation = 0x0, kOpText = 0x1, kOpBinary = 0x2, kOpClose = 0x8, kOpPing = 0x9, kOpPong = 0xA };

std::string ws_frame(unsigned char opcode, const std::string& payload, bool masked) {
  std::string f;
  f.push_back(static_cast<char>(0x80 | opcode));
  const unsigned char mask_bit = masked ? 0x80 : 0x00;
  const std::size_t n = payload.size();
  if (n < 126) {
    f.push_back(static_cast<char>(mask_bit | n));
  } else if (n <= 0xFFFF) {
    f.push_back(static_cast<char>(mask_bit | 126));
    f.push_back(static_cast<char>((n >> 8) & 0xFF));
    f.push_back(static_cast<char>(n & 0xFF));
  } else {
    f.push_back(static_cast<char>(mask_bit | 127));
    for (int i = 7; i >= 0; --i) f.push_back(static_cast<char>((static_cast<std::uint64_t>(n) >> (8 * i)) & 0xFF));
  }
  if (!masked) return f + payload;
  // Masking only defeats proxy cache poisoning; a fixed key is fine for a
  // test client.
  const std::array<unsigned char, 4> key{0x3a, 0x91, 0x5c, 0xe7};
  for (unsigned char k : key) f.push_back(static_cast<char>(k));
  for (std::size_t i = 0; i < n; ++i) f.push_back(static_cast<char>(payload[i] ^ key[i % 4]));
  return f;
}

class WebSocketConnection : public Connection {
 public:
  WebSocketConnection(int fd, std::string buffered, bool client) : stream_(fd, std::move(buffered)), client_(client) {}

  ReadResult read_line(std::chrono::milliseconds timeout) override {
    const auto deadline = deadline_for(timeout);
    for (;;) {
      auto frame = parse_frame();
      if (frame) {
        const auto [fin, opcode, payload] = *frame;
        switch (opcode) {
          case kOpPing:
            stream_.write(ws_frame(kOpPong, payload, client_));
            continue;
          case kOpPong:
            continue;
          case kOpClose:
            stream_.write(ws_frame(kOpClose, payload.substr(0, 2), client_));
            return {ReadStatus::closed, {}};
          case kOpText:
          case kOpBinary:
            message_ = payload;
            break;
          case kOpContinuation:
            message_ += payload;
            break;
          default:
            return {ReadStatus::closed, {}};
        }
        if (message_.size() > kMaxMessage) return {ReadStatus::closed, {}};
        if (fin) {
          ReadResult r{ReadStatus::line, std::move(message_)};
          message_.clear();
          while (!r.line.empty() && (r.line.back() == '\n' || r.line.back() == '\r')) r.line.pop_back();
          return r;
        }
        continue;
      }
      if (bad_) return {ReadStatus::closed, {}};
      if (!stream_.fill(deadline)) {
        if (stream_.eof()) return {ReadStatus::closed, {}};
        if (deadline && Clock::now() >= *deadline) return {ReadStatus::timeout, {}};
      }
    }
  }

  bool write_line(const std::string& line) override {
    std::string text = line;
    if (!text.empty() && text.back() == '\n') text.pop_back();
    return stream_.write(ws_frame(kOpText, text, client_));
  }

  void close() override {
    stream_.write(ws_frame(kOpClose, std::string("\x03\xe8", 2), client_));
    stream_.close();
  }

 private:
  struct Frame {
    bool fin;
    unsigned char opcode;
    std::string payload;
  };

  std::optional<Frame> parse_frame() {
    auto& b = stream_.buffer();
    if (b.size() < 2) return std::nullopt;
    const auto at = [&](std::size_t i) { return static_cast<unsigned char>(b[i]); };
    const bool fin = (at(0) & 0x80) != 0;
    const unsigned char opcode = at(0) & 0x0F;
    const bool masked = (at(1) & 0x80) != 0;
    std::uint64_t len = at(1) & 0x7F;
    std::size_t pos = 2;
    if (len == 126) {
      if (b.size() < 4) return std::nullopt;
      len = (static_cast<std::uint64_t>(at(2)) << 8) | at(3);
      pos = 4;
    } else if (len == 127) {
      if (b.size() < 10) return std::nullopt;
      len = 0;
      for (std::size_t i = 0; i < 8; ++i) len = (len << 8) | at(2 + i);
      pos = 10;
    }
    if (len > kMaxMessage) {
      bad_ = true;
      return std::nullopt;
    }
    std::array<unsigned char, 4> key{};
    if (masked) {
      if (b.size() < pos + 4) return std::nullopt;
      for (std::size_t i = 0; i < 4; ++i) key[i] = at(pos + i);
      pos += 4;
    }
    if (b.size() < pos + len) return std::nullopt;
    std::string payload = b.substr(pos, static_cast<std::size_t>(len));
    if (masked) {
      for (std::size_t i = 0; i < payload.size(); ++i) payload[i] = static_cast<char>(payload[i] ^ key[i % 4]);
    }
    b.erase(0, pos + static_cast<std::size_t>(len));
    return Frame{fin, opcode, std::move(payload)};
  }

  FdStream stream_;
  bool client_;
  bool bad_ = false;
  std::string message_;
};

std::string base64(const unsigned char* data, std::size_t n) {
  std::string out(4 * ((n + 2) / 3), '\0');
  const int k = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data, static_cast<int>(n));
  out.resize(static_cast<std::size_t>(k));
  return out;
}

struct HttpRequest {
  std::string method;
  std::string path;
  std::vector<std::pair<std::string, std::string>> headers;  // lower-cased names

  std::string header(const std::string& name) const {
    for (const auto& [k, v] : headers) {
      if (k == name) return v;
    }
    return "";
  }
};

/// Reads up to the blank line ending an HTTP head. Leaves the rest in `buf`.
std::optional<std::string> read_http_head(int fd, std::string& buf, std::chrono::milliseconds timeout) {
  const auto deadline = Clock::now() + timeout;
  for (;;) {
    const auto end = buf.find("\r\n\r\n");
    if (end != std::string::npos) {
      std::string head = buf.substr(0, end);
      buf.erase(0, end + 4);
      return head;
    }
    if (buf.size() > kMaxHeader) return std::nullopt;
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
    if (left <= 0) return std::nullopt;
    pollfd p{fd, POLLIN, 0};
    if (::poll(&p, 1, static_cast<int>(left)) <= 0) continue;
    std::array<char, 4096> chunk;
    const ssize_t k = ::recv(fd, chunk.data(), chunk.size(), 0);
    if (k <= 0) return std::nullopt;
    buf.append(chunk.data(), static_cast<std::size_t>(k));
  }
}

HttpRequest parse_request(const std::string& head) {
  HttpRequest req;
  std::istringstream in(head);
  std::string line;
  std::getline(in, line);
  std::istringstream first(trim(line));
  first >> req.method >> req.path;
  while (std::getline(in, line)) {
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    req.headers.emplace_back(lower(trim(line.substr(0, colon))), trim(line.substr(colon + 1)));
  }
  return req;
}

std::string content_type_for(const std::filesystem::path& p) {
  const std::string ext = lower(p.extension().string());
  if (ext == ".html" || ext == ".htm") return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript; charset=utf-8";
  if (ext == ".css") return "text/css; charset=utf-8";
  if (ext == ".json" || ext == ".map") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".ico") return "image/x-icon";
  return "application/octet-stream";
}

void send_http(int fd, int status, const std::string& reason, const std::string& type, const std::string& body) {
  std::ostringstream out;
  out << "HTTP/1.1 " << status << ' ' << reason << "\r\n"
      << "Content-Type: " << type << "\r\n"
      << "Content-Length: " << body.size() << "\r\n"
      << "Connection: close\r\n\r\n"
      << body;
  const std::string s = out.str();
  send_all(fd, s.data(), s.size());
}

/// Maps /ui, /ui/ and /ui/<rel> to a file under ui_dir. Rejects traversal.
std::optional<std::filesystem::path> resolve_ui_path(const std::filesystem::path& ui_dir, std::string path) {
  if (const auto q = path.find_first_of("?#"); q != std::string::npos) path.resize(q);
  if (path == "/ui" || path == "/ui/") return ui_dir / "index.html";
  if (path.rfind("/ui/", 0) != 0) return std::nullopt;
  const std::filesystem::path rel(path.substr(4));
  for (const auto& part : rel) {
    if (part == ".." || part == ".") return std::nullopt;
  }
  if (rel.is_absolute()) return std::nullopt;
  return ui_dir / rel;
}

void serve_static(int fd, const HttpRequest& req, const std::optional<std::filesystem::path>& ui_dir) {
  if (req.method != "GET") {
    send_http(fd, 405, "Method Not Allowed", "text/plain", "method not allowed\n");
    return;
  }
  std::optional<std::filesystem::path> file;
  if (ui_dir) file = resolve_ui_path(*ui_dir, req.path);
  std::error_code ec;
  if (!file || !std::filesystem::is_regular_file(*file, ec)) {
    send_http(fd, 404, "Not Found", "text/plain", "not found\n");
    return;
  }
  std::ifstream in(*file, std::ios::binary);
  std::ostringstream body;
  body << in.rdbuf();
  send_http(fd, 200, "OK", content_type_for(*file), body.str());
}

int connect_socket(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (::getaddrinfo(host.c_str(), service.c_str(), &hints, &res) != 0) {
    throw RuntimeError("cannot resolve host '" + host + "'");
  }
  int fd = -1;
  for (addrinfo* a = res; a != nullptr; a = a->ai_next) {
    fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw RuntimeError("cannot connect to " + host + ":" + service + ": " + std::strerror(errno));
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return fd;
}

}  // namespace

std::string websocket_accept_key(const std::string& client_key) {
  const std::string s = client_key + "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(s.data()), s.size(), digest);
  return base64(digest, sizeof digest);
}

Listener::Listener(std::uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw RuntimeError(std::string("socket: ") + std::strerror(errno));
  const int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_ANY);
  addr.sin_port = htons(port);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    const int err = errno;
    ::close(fd_);
    fd_ = -1;
    if (err == EADDRINUSE) throw PortInUse("port " + std::to_string(port) + " is already in use");
    throw RuntimeError("bind port " + std::to_string(port) + ": " + std::strerror(err));
  }
  if (::listen(fd_, 16) != 0) {
    const int err = errno;
    ::close(fd_);
    fd_ = -1;
    throw RuntimeError(std::string("listen: ") + std::strerror(err));
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

Listener::~Listener() {
  if (fd_ >= 0) ::close(fd_);
}

int Listener::accept(std::chrono::milliseconds timeout) {
  pollfd p{fd_, POLLIN, 0};
  if (::poll(&p, 1, static_cast<int>(timeout.count())) <= 0) return -1;
  const int fd = ::accept(fd_, nullptr, nullptr);
  if (fd >= 0) {
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  }
  return fd;
}

std::unique_ptr<Connection> open_server_connection(int fd, const std::optional<std::filesystem::path>& ui_dir) {
  // Sniff the first bytes: "GET " means HTTP, anything else is a line client.
  std::string buf;
  const auto deadline = Clock::now() + std::chrono::seconds(10);
  while (buf.size() < 4 && buf.find('\n') == std::string::npos) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
    pollfd p{fd, POLLIN, 0};
    if (left <= 0 || ::poll(&p, 1, static_cast<int>(left)) <= 0) {
      ::close(fd);
      return nullptr;
    }
    std::array<char, 4096> chunk;
    const ssize_t k = ::recv(fd, chunk.data(), chunk.size(), 0);
    if (k <= 0) {
      ::close(fd);
      return nullptr;
    }
    buf.append(chunk.data(), static_cast<std::size_t>(k));
  }
  if (buf.rfind("GET ", 0) != 0) return std::make_unique<LineConnection>(fd, std::move(buf));

  const auto head = read_http_head(fd, buf, std::chrono::seconds(10));
  if (!head) {
    ::close(fd);
    return nullptr;
  }
  const HttpRequest req = parse_request(*head);
  const std::string key = req.header("sec-websocket-key");
  if (lower(req.header("upgrade")) == "websocket" && !key.empty()) {
    const std::string resp =
        "HTTP/1.1 101 Switching Protocols\r\n"
        "Upgrade: websocket\r\n"
        "Connection: Upgrade\r\n"
        "Sec-WebSocket-Accept: " +
        websocket_accept_key(key) + "\r\n\r\n";
    if (!send_all(fd, resp.data(), resp.size())) {
      ::close(fd);
      return nullptr;
    }
    return std::make_unique<WebSocketConnection>(fd, std::move(buf), false);
  }
  serve_static(fd, req, ui_dir);
  ::shutdown(fd, SHUT_WR);
  ::close(fd);
  return nullptr;
}

std::unique_ptr<Connection> connect_tcp(const std::string& host, std::uint16_t port) {
  return std::make_unique<LineConnection>(connect_socket(host, port), std::string());
}

std::unique_ptr<Connection> connect_websocket(const std::string& host, std::uint16_t port, const std::string& path) {
  const int fd = connect_socket(host, port);
  const std::string key = "c29jbmF2LXRlc3Qta2V5IQ==";
  const std::string req = "GET " + path + " HTTP/1.1\r\nHost: " + host + ":" + std::to_string(port) +
                          "\r\nUpgrade: websocket\r\nConnection: Upgrade\r\nSec-WebSocket-Key: " + key +
                          "\r\nSec-WebSocket-Version: 13\r\n\r\n";
  if (!send_all(fd, req.data(), req.size())) {
    ::close(fd);
    throw RuntimeError("websocket handshake failed");
  }
  std::string buf;
  const auto head = read_http_head(fd, buf, std::chrono::seconds(10));
  if (!head || head->find(" 101 ") == std::string::npos ||
      parse_request(*head).header("sec-websocket-accept") != websocket_accept_key(key)) {
    ::close(fd);
    throw RuntimeError("websocket handshake rejected");
  }
  return std::make_unique<WebSocketConnection>(fd, std::move(buf), true);
}

HttpResponse http_get(const std::string& host, std::uint16_t port, const std::string& path) {
  const int fd = connect_socket(host, port);
  const std::string req = "GET " + path + " HTTP/1.1\r\nHost: " + host + "\r\nConnection: close\r\n\r\n";
  send_all(fd, req.data(), req.size());
  std::string all;
  std::array<char, 65536> chunk;
  for (;;) {
    const ssize_t k = ::recv(fd, chunk.data(), chunk.size(), 0);
    if (k <= 0) break;
    all.append(chunk.data(), static_cast<std::size_t>(k));
  }
  ::close(fd);
  HttpResponse r;
  const auto end = all.find("\r\n\r\n");
  if (end == std::string::npos) throw RuntimeError("malformed HTTP response");
  const HttpRequest head = parse_request(all.substr(0, end));
  // For a response, "method" holds the version and "path" the status code.
  r.status = std::atoi(head.path.c_str());
  r.content_type = head.header("content-type");
  r.body = all.substr(end + 4);
  return r;
}

}  // namespace socnav
