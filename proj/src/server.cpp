#include "catch919/server.hpp"

#include <deque>
#include <set>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

namespace catch919 {
namespace {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

class Hub;

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, Hub& hub) : ws_(std::move(socket)), hub_(hub) {}

  void open();
  void send(std::shared_ptr<const std::string> text);
  void close();

 private:
  void read();
  void write_next();

  websocket::stream<beast::tcp_stream> ws_;
  Hub& hub_;
  beast::flat_buffer buffer_;
  std::deque<std::shared_ptr<const std::string>> queue_;
  bool open_ = false;
};

class Hub {
 public:
  Hub(std::shared_ptr<SimSession> session, const ServerOptions& o)
      : session_(std::move(session)), acceptor_(ioc_), timer_(ioc_), heartbeat_(o.heartbeat) {
    const tcp::endpoint ep(asio::ip::make_address(o.address), o.port);
    acceptor_.open(ep.protocol());
    acceptor_.set_option(asio::socket_base::reuse_address(true));
    acceptor_.bind(ep);
    acceptor_.listen();
    port_ = acceptor_.local_endpoint().port();
    accept();
    tick();
  }

  asio::io_context& ioc() { return ioc_; }
  unsigned short port() const { return port_; }

  void join(const std::shared_ptr<Connection>& c) { clients_.insert(c); }
  void leave(const std::shared_ptr<Connection>& c) { clients_.erase(c); }

  void on_message(const std::shared_ptr<Connection>& from, const std::string& text) {
    CommandMessage msg;
    try {
      msg = parse_command(text);
    } catch (const ProtocolError& e) {
      Ack a;
      a.tick = session_->snapshot().tick;
      a.reason = e.what();
      from->send(std::make_shared<const std::string>(ack_json(a)));
      return;
    }
    if (std::holds_alternative<GetState>(msg.command)) {
      from->send(std::make_shared<const std::string>(state_json(session_->snapshot(), session_->model())));
      return;
    }
    const ApplyResult r = session_->apply(msg);
    from->send(std::make_shared<const std::string>(ack_json(r.ack)));
    if (r.state) broadcast(std::make_shared<const std::string>(state_json(*r.state, session_->model())));
  }

  void shutdown() {
    asio::post(ioc_, [this] {
      beast::error_code ec;
      acceptor_.close(ec);
      timer_.cancel();
      for (const auto& c : std::set(clients_)) c->close();
      clients_.clear();
      ioc_.stop();
    });
  }

 private:
  void accept() {
    acceptor_.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      std::make_shared<Connection>(std::move(socket), *this)->open();
      accept();
    });
  }

  void tick() {
    timer_.expires_after(heartbeat_);
    timer_.async_wait([this](beast::error_code ec) {
      if (ec) return;
      if (!clients_.empty()) broadcast(std::make_shared<const std::string>(state_json(session_->snapshot(), session_->model())));
      tick();
    });
  }

  void broadcast(const std::shared_ptr<const std::string>& text) {
    for (const auto& c : clients_) c->send(text);
  }

  std::shared_ptr<SimSession> session_;
  asio::io_context ioc_;
  tcp::acceptor acceptor_;
  asio::steady_timer timer_;
  std::chrono::milliseconds heartbeat_;
  unsigned short port_ = 0;
  std::set<std::shared_ptr<Connection>> clients_;
};

void Connection::open() {
  ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
  ws_.text(true);
  ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
    if (ec) return;
    self->open_ = true;
    self->hub_.join(self);
    self->read();
  });
}

void Connection::read() {
  ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
    if (ec) {
      self->open_ = false;
      self->hub_.leave(self);
      return;
    }
    const std::string text = beast::buffers_to_string(self->buffer_.data());
    self->buffer_.consume(self->buffer_.size());
    self->hub_.on_message(self, text);
    self->read();
  });
}

void Connection::send(std::shared_ptr<const std::string> text) {
  if (!open_) return;
  queue_.push_back(std::move(text));
  if (queue_.size() == 1) write_next();
}

void Connection::write_next() {
  ws_.async_write(asio::buffer(*queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
    if (ec) {
      self->open_ = false;
      self->queue_.clear();
      self->hub_.leave(self);
      return;
    }
    self->queue_.pop_front();
    if (!self->queue_.empty()) self->write_next();
  });
}

void Connection::close() {
  open_ = false;
  beast::error_code ec;
  beast::get_lowest_layer(ws_).socket().close(ec);
}

}  // namespace

struct Server::Impl {
  Impl(std::shared_ptr<SimSession> s, const ServerOptions& o) : hub(std::move(s), o) {}
  ~Impl() {
    hub.shutdown();
    if (thread.joinable()) thread.join();
  }
  Hub hub;
  std::thread thread;
};

Server::Server(std::shared_ptr<SimSession> session, ServerOptions options)
    : impl_(std::make_unique<Impl>(std::move(session), options)) {}

Server::~Server() = default;

unsigned short Server::port() const { return impl_->hub.port(); }

void Server::start() {
  impl_->thread = std::thread([this] { impl_->hub.ioc().run(); });
}

void Server::run() { impl_->hub.ioc().run(); }

void Server::stop() { impl_->hub.shutdown(); }

}  // namespace catch919
