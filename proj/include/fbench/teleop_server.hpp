#pragma once
// Network side of the teleop bridge: one Boost.Beast listener serving the
// `/teleop` websocket and static UI files. All sockets live on one io thread;
// the simulation loop runs on its own thread at the action rate and hands
// snapshots over with asio::post, so it never blocks on a slow client.

#include <atomic>
#include <chrono>
#include <deque>
#include <filesystem>
#include <fstream>
#include <future>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "fbench/teleop.hpp"

namespace fbench {

namespace teleop_net {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

inline std::string mime_type(const std::filesystem::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "application/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".map") return "application/json";
  return "application/octet-stream";
}

/// Map a request target onto a file under `root`; nullopt for anything that
/// escapes it.
inline std::optional<std::filesystem::path> resolve_static(const std::filesystem::path& root, std::string target) {
  if (auto q = target.find('?'); q != std::string::npos) target.resize(q);
  if (target.empty() || target[0] != '/') return std::nullopt;
  if (target.back() == '/') target += "index.html";
  const std::filesystem::path rel = std::filesystem::path(target.substr(1)).lexically_normal();
  if (rel.empty() || rel.is_absolute() || *rel.begin() == "..") return std::nullopt;
  return root / rel;
}

class Hub;

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket&& s, Hub& hub) : ws_(std::move(s)), hub_(hub) {}

  void start(http::request<http::string_body> req);
  void send(std::shared_ptr<const std::string> msg);

 private:
  void do_read();
  void do_write();

  websocket::stream<beast::tcp_stream> ws_;
  Hub& hub_;
  beast::flat_buffer buf_;
  std::deque<std::shared_ptr<const std::string>> out_;
  bool open_ = false;
};

/// Live websocket sessions plus the command sink. Touched only on the io thread.
class Hub {
 public:
  explicit Hub(std::function<void(const Command&)> sink) : sink_(std::move(sink)) {}
  void join(const std::shared_ptr<WsSession>& s) { sessions_.insert(s); }
  void leave(const std::shared_ptr<WsSession>& s) { sessions_.erase(s); }
  void broadcast(const std::shared_ptr<const std::string>& msg) {
    for (const auto& s : sessions_) s->send(msg);
  }
  void command(const Command& c) { sink_(c); }
  std::size_t size() const { return sessions_.size(); }

 private:
  std::function<void(const Command&)> sink_;
  std::set<std::shared_ptr<WsSession>> sessions_;
};

inline void WsSession::start(http::request<http::string_body> req) {
  ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
  ws_.text(true);
  ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
    if (ec) return;
    self->open_ = true;
    self->hub_.join(self);
    self->do_read();
    if (!self->out_.empty()) self->do_write();
  });
}

inline void WsSession::send(std::shared_ptr<const std::string> msg) {
  // Keep at most one snapshot waiting behind the one being written.
  if (out_.size() >= 2) out_.pop_back();
  out_.push_back(std::move(msg));
  if (out_.size() == 1 && open_) do_write();
}

inline void WsSession::do_write() {
  ws_.async_write(asio::buffer(*out_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
    if (ec) {
      self->hub_.leave(self);
      return;
    }
    self->out_.pop_front();
    if (!self->out_.empty()) self->do_write();
  });
}

inline void WsSession::do_read() {
  ws_.async_read(buf_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
    if (ec) {
      self->hub_.leave(self);
      return;
    }
    const std::string text = beast::buffers_to_string(self->buf_.data());
    self->buf_.consume(self->buf_.size());
    try {
      self->hub_.command(decode_command(text));
    } catch (const std::exception& e) {
      self->send(std::make_shared<const std::string>(encode_error(e.what())));
    }
    self->do_read();
  });
}

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket&& s, Hub& hub, std::optional<std::filesystem::path> ui_dir)
      : stream_(std::move(s)), hub_(hub), ui_dir_(std::move(ui_dir)) {}

  void start() { do_read(); }

 private:
  void do_read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buf_, req_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return;
      self->handle();
    });
  }

  void handle() {
    if (websocket::is_upgrade(req_)) {
      if (req_.target() == "/teleop") {
        stream_.expires_never();
        std::make_shared<WsSession>(stream_.release_socket(), hub_)->start(std::move(req_));
        return;
      }
      return reply(http::status::not_found, "no websocket endpoint here\n", "text/plain");
    }
    if (req_.method() != http::verb::get && req_.method() != http::verb::head)
      return reply(http::status::method_not_allowed, "GET only\n", "text/plain");
    if (!ui_dir_) return reply(http::status::not_found, "no --ui-dir configured\n", "text/plain");
    const auto path = resolve_static(*ui_dir_, std::string(req_.target()));
    if (!path) return reply(http::status::bad_request, "bad path\n", "text/plain");
    std::ifstream in(*path, std::ios::binary);
    if (!in || std::filesystem::is_directory(*path)) return reply(http::status::not_found, "not found\n", "text/plain");
    std::stringstream body;
    body << in.rdbuf();
    reply(http::status::ok, body.str(), mime_type(*path));
  }

  void reply(http::status st, std::string body, const std::string& type) {
    auto res = std::make_shared<http::response<http::string_body>>(st, req_.version());
    res->set(http::field::content_type, type);
    res->keep_alive(req_.keep_alive());
    res->body() = std::move(body);
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
      if (ec) return;
      if (!res->keep_alive()) {
        beast::error_code ignored;
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
        return;
      }
      self->do_read();
    });
  }

  beast::tcp_stream stream_;
  Hub& hub_;
  std::optional<std::filesystem::path> ui_dir_;
  beast::flat_buffer buf_;
  http::request<http::string_body> req_;
};

}  // namespace teleop_net

struct TeleopServerConfig {
  std::string address = "127.0.0.1";
  unsigned short port = 8765;  // 0 picks a free port
  std::optional<std::filesystem::path> ui_dir;
};

/// Owns the io thread and the simulation loop thread.
class TeleopServer {
 public:
  TeleopServer(TeleopSession& session, TeleopServerConfig cfg)
      : session_(session),
        cfg_(std::move(cfg)),
        hub_([this](const Command& c) { session_.put(c); }),
        acceptor_(io_) {
    namespace asio = teleop_net::asio;
    const auto ep = teleop_net::tcp::endpoint(asio::ip::make_address(cfg_.address), cfg_.port);
    acceptor_.open(ep.protocol());
    acceptor_.set_option(asio::socket_base::reuse_address(true));
    acceptor_.bind(ep);
    acceptor_.listen();
    port_ = acceptor_.local_endpoint().port();
  }

  ~TeleopServer() { stop(); }

  unsigned short port() const { return port_; }

  /// Start serving. With `period` set the simulation loop ticks on its own
  /// thread; without it the caller drives tick_once().
  void start(std::optional<std::chrono::nanoseconds> period) {
    do_accept();
    io_thread_ = std::thread([this] { io_.run(); });
    if (period) {
      sim_thread_ = std::thread([this, p = *period] {
        auto next = std::chrono::steady_clock::now();
        while (!stopping_) {
          tick_once();
          next += p;
          std::this_thread::sleep_until(next);
        }
      });
    }
  }

  /// Advance the simulation one step and publish the snapshot.
  Snapshot tick_once() {
    Snapshot s = session_.tick();
    auto msg = std::make_shared<const std::string>(encode_snapshot(s));
    teleop_net::asio::post(io_, [this, msg] { hub_.broadcast(msg); });
    return s;
  }

  void stop() {
    if (stopping_.exchange(true)) return;
    if (sim_thread_.joinable()) sim_thread_.join();
    teleop_net::asio::post(io_, [this] {
      teleop_net::beast::error_code ec;
      acceptor_.close(ec);
    });
    io_.stop();
    if (io_thread_.joinable()) io_thread_.join();
  }

  /// Blocks until stop() is called from elsewhere (or a signal handler).
  void wait() {
    if (sim_thread_.joinable()) sim_thread_.join();
    if (io_thread_.joinable()) io_thread_.join();
  }

  /// Number of connected websocket clients, read on the io thread.
  std::size_t clients() {
    std::promise<std::size_t> p;
    auto f = p.get_future();
    teleop_net::asio::post(io_, [&] { p.set_value(hub_.size()); });
    return f.get();
  }

 private:
  void do_accept() {
    acceptor_.async_accept([this](teleop_net::beast::error_code ec, teleop_net::tcp::socket s) {
      if (ec) return;
      std::make_shared<teleop_net::HttpSession>(std::move(s), hub_, cfg_.ui_dir)->start();
      do_accept();
    });
  }

  TeleopSession& session_;
  TeleopServerConfig cfg_;
  teleop_net::asio::io_context io_;
  teleop_net::Hub hub_;
  teleop_net::tcp::acceptor acceptor_;
  unsigned short port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread io_thread_, sim_thread_;
};

}  // namespace fbench
