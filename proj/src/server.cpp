#include "encounter/server.hpp"

#include <atomic>
#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <vector>

#include "encounter/session.hpp"

namespace encounter {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

namespace {

constexpr std::size_t kMaxPendingReplies = 64;
constexpr std::size_t kMaxMessageBytes = 64 * 1024;

std::string_view mime_type(const std::filesystem::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".html") return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".map") return "application/json";
  return "application/octet-stream";
}

// Maps a request target onto a file under root. Rejects anything that would
// escape it.
std::optional<std::filesystem::path> resolve(const std::filesystem::path& root,
                                             std::string_view target) {
  std::string path(target.substr(0, target.find('?')));
  if (path.empty() || path.front() != '/') return std::nullopt;
  if (path.find("..") != std::string::npos || path.find('\\') != std::string::npos) {
    return std::nullopt;
  }
  if (path.back() == '/') path += "index.html";
  return root / path.substr(1);
}

}  // namespace

class Connection;

struct Server::Impl {
  Impl(Scenario scenario, ServerOptions opts)
      : options(std::move(opts)),
        session(std::move(scenario), options.record_dir),
        acceptor(ioc) {
    const auto address = net::ip::make_address(options.address);
    tcp::endpoint endpoint(address, options.port);
    beast::error_code ec;
    acceptor.open(endpoint.protocol(), ec);
    if (!ec) acceptor.set_option(net::socket_base::reuse_address(true), ec);
    if (!ec) acceptor.bind(endpoint, ec);
    if (!ec) acceptor.listen(net::socket_base::max_listen_connections, ec);
    if (ec) {
      throw std::runtime_error("cannot listen on " + options.address + ":" +
                               std::to_string(options.port) + ": " + ec.message());
    }
  }

  void accept();
  void physics();
  void shutdown();  // network thread
  void broadcast(std::shared_ptr<const std::string> tick);

  ServerOptions options;
  Session session;  // touched only by the physics thread
  net::io_context ioc;
  tcp::acceptor acceptor;

  std::mutex inbox_mutex;
  std::vector<std::pair<std::weak_ptr<Connection>, std::string>> inbox;

  std::set<std::shared_ptr<Connection>> connections;  // network thread only
  std::atomic<bool> running{false};
  std::mutex stop_mutex;
  std::condition_variable stopped;
  bool stop_requested = false;
  std::optional<net::signal_set> signals;
  std::thread network_thread;
  std::thread physics_thread;
  std::shared_ptr<const std::string> latest;  // network thread only
  std::string hello;
};

// One client. HTTP requests are answered from the web root until the client
// asks for a WebSocket upgrade.
class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, Server::Impl& server)
      : stream_(std::move(socket)), server_(server) {}

  void start() { read_request(); }

  // Network thread only.
  void offer_tick(std::shared_ptr<const std::string> tick) {
    if (!ws_) return;
    pending_tick_ = std::move(tick);
    write_next();
  }

  void offer_reply(std::string reply) {
    if (!ws_) return;
    if (replies_.size() >= kMaxPendingReplies) replies_.pop_front();
    replies_.push_back(std::make_shared<const std::string>(std::move(reply)));
    write_next();
  }

  void close() {
    beast::error_code ec;
    if (ws_) {
      beast::get_lowest_layer(*ws_).socket().close(ec);
    } else {
      stream_.socket().close(ec);
    }
  }

 private:
  void read_request() {
    request_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, request_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) {
                       self->on_request(ec);
                     });
  }

  void on_request(beast::error_code ec) {
    if (ec) return drop();
    if (websocket::is_upgrade(request_)) return upgrade();
    serve_file();
  }

  void serve_file() {
    auto response = std::make_shared<http::response<http::string_body>>();
    response->version(request_.version());
    response->keep_alive(request_.keep_alive());
    response->set(http::field::server, "encounter");
    const auto file = server_.options.web_root
                          ? resolve(*server_.options.web_root,
                                    std::string_view(request_.target().data(), request_.target().size()))
                          : std::nullopt;
    std::ifstream in;
    std::error_code fs_error;
    if (file && std::filesystem::is_regular_file(*file, fs_error)) in.open(*file, std::ios::binary);
    if (request_.method() != http::verb::get && request_.method() != http::verb::head) {
      response->result(http::status::method_not_allowed);
      response->body() = "method not allowed\n";
    } else if (!in.is_open() || !in) {
      response->result(http::status::not_found);
      response->set(http::field::content_type, "text/plain");
      response->body() = "not found\n";
    } else {
      std::ostringstream ss;
      ss << in.rdbuf();
      response->result(http::status::ok);
      response->set(http::field::content_type, std::string(mime_type(*file)));
      response->body() = ss.str();
    }
    response->prepare_payload();
    http::async_write(stream_, *response,
                      [self = shared_from_this(), response](beast::error_code ec, std::size_t) {
                        if (ec || !response->keep_alive()) return self->drop();
                        self->read_request();
                      });
  }

  void upgrade() {
    stream_.expires_never();
    ws_.emplace(std::move(stream_));
    ws_->set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_->read_message_max(kMaxMessageBytes);
    ws_->async_accept(request_, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return self->drop();
      self->open_ = true;
      self->offer_reply(self->server_.hello);
      if (self->server_.latest) self->offer_tick(self->server_.latest);
      self->read_message();
    });
  }

  void read_message() {
    ws_->async_read(incoming_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->drop();
      std::string text = beast::buffers_to_string(self->incoming_.data());
      self->incoming_.consume(self->incoming_.size());
      {
        std::lock_guard lock(self->server_.inbox_mutex);
        self->server_.inbox.emplace_back(self, std::move(text));
      }
      self->read_message();
    });
  }

  // Replies first, then the newest tick. Only one write is in flight.
  void write_next() {
    if (!open_ || writing_) return;
    std::shared_ptr<const std::string> next;
    if (!replies_.empty()) {
      next = replies_.front();
      replies_.pop_front();
    } else if (pending_tick_) {
      next = std::move(pending_tick_);
      pending_tick_.reset();
    } else {
      return;
    }
    writing_ = true;
    ws_->text(true);
    ws_->async_write(net::buffer(*next),
                     [self = shared_from_this(), next](beast::error_code ec, std::size_t) {
                       self->writing_ = false;
                       if (ec) return self->drop();
                       self->write_next();
                     });
  }

  void drop() {
    open_ = false;
    server_.connections.erase(shared_from_this());
  }

  beast::tcp_stream stream_;
  std::optional<websocket::stream<beast::tcp_stream>> ws_;
  Server::Impl& server_;
  beast::flat_buffer buffer_;
  beast::flat_buffer incoming_;
  http::request<http::string_body> request_;
  std::deque<std::shared_ptr<const std::string>> replies_;
  std::shared_ptr<const std::string> pending_tick_;
  bool writing_ = false;
  bool open_ = false;
};

void Server::Impl::accept() {
  acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
    if (ec) {
      if (ec == net::error::operation_aborted) return;
    } else {
      auto c = std::make_shared<Connection>(std::move(socket), *this);
      connections.insert(c);
      c->start();
    }
    accept();
  });
}

void Server::Impl::shutdown() {
  beast::error_code ec;
  acceptor.close(ec);
  if (signals) signals->cancel(ec);
  for (const auto& c : std::set(connections)) c->close();
  connections.clear();
  ioc.stop();
}

void Server::Impl::broadcast(std::shared_ptr<const std::string> tick) {
  net::post(ioc, [this, tick = std::move(tick)] {
    latest = tick;
    for (const auto& c : connections) c->offer_tick(tick);
  });
}

void Server::Impl::physics() {
  using clock = std::chrono::steady_clock;
  const auto period = std::chrono::duration_cast<clock::duration>(
      std::chrono::duration<double>(session.simulator().config().dt));
  auto deadline = clock::now();
  std::uint64_t idle = 0;
  broadcast(std::make_shared<const std::string>(tick_json(session.tick())));
  while (running) {
    std::vector<std::pair<std::weak_ptr<Connection>, std::string>> batch;
    {
      std::lock_guard lock(inbox_mutex);
      batch.swap(inbox);
    }
    for (auto& [who, text] : batch) {
      if (auto reply = session.submit(text)) {
        net::post(ioc, [who, reply = std::move(*reply)]() mutable {
          if (auto c = who.lock()) c->offer_reply(std::move(reply));
        });
      }
    }
    const std::uint64_t before = session.steps();
    session.step();
    for (std::string& note : session.take_outbox()) {
      net::post(ioc, [this, note = std::move(note)] {
        for (const auto& c : connections) c->offer_reply(note);
      });
    }
    const bool advanced = session.steps() != before;
    // While paused ticks keep going out at the same rate so edits show up.
    const std::uint64_t count = advanced ? session.steps() : ++idle;
    if (count % kStepsPerBroadcast == 0) {
      broadcast(std::make_shared<const std::string>(tick_json(session.tick())));
    }

    deadline += period;
    const auto now = clock::now();
    // After a stall, resume the cadence instead of running catch-up steps.
    if (deadline < now - 5 * period) deadline = now;
    std::this_thread::sleep_until(deadline);
  }
}

Server::Server(Scenario scenario, ServerOptions options)
    : impl_(std::make_unique<Impl>(std::move(scenario), std::move(options))) {
  impl_->hello = hello_json(impl_->session.simulator().config());
}

Server::~Server() {
  stop();
  if (impl_->network_thread.joinable()) impl_->network_thread.join();
  if (impl_->physics_thread.joinable()) impl_->physics_thread.join();
}

std::uint16_t Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::start() {
  if (impl_->running.exchange(true)) return;
  impl_->accept();
  if (impl_->options.handle_signals) {
    impl_->signals.emplace(impl_->ioc, SIGINT, SIGTERM);
    impl_->signals->async_wait([this](beast::error_code ec, int) {
      if (!ec) stop();
    });
  }
  impl_->network_thread = std::thread([this] { impl_->ioc.run(); });
  impl_->physics_thread = std::thread([this] { impl_->physics(); });
}

void Server::wait() {
  std::unique_lock lock(impl_->stop_mutex);
  impl_->stopped.wait(lock, [&] { return impl_->stop_requested; });
}

void Server::stop() {
  if (impl_->running) {
    net::post(impl_->ioc, [impl = impl_.get()] { impl->shutdown(); });
  } else {
    impl_->ioc.stop();
  }
  impl_->running = false;
  std::lock_guard lock(impl_->stop_mutex);
  impl_->stop_requested = true;
  impl_->stopped.notify_all();
}

}  // namespace encounter
