#include "ksf/service/server.hpp"

#include <csignal>
#include <cstdlib>
#include <deque>
#include <thread>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <json.hpp>

#include "ksf/audio_io.hpp"
#include "ksf/error.hpp"
#include "ksf/presets.hpp"

namespace ksf::service {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

constexpr std::size_t kMaxUploadBytes = 64u << 20;

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket&& socket, std::shared_ptr<const SignalRegistry> registry)
      : ws_(std::move(socket)), protocol_(std::move(registry)) {}

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept,
                                                    shared_from_this()));
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    do_read();
  }

  void do_read() {
    reading_ = true;
    ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read,
                                                      shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    reading_ = false;
    if (ec) return;
    const std::string data = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    auto replies = ws_.got_text() ? protocol_.on_text(data) : protocol_.on_binary(data);
    for (auto& m : replies) enqueue(std::move(m));
    if (protocol_.closed()) {
      closing_ = true;
      if (queue_.empty()) do_close();
      return;
    }
    // While the client is not draining frames, stop reading: its updates wait
    // in the transport instead of in an unbounded server queue.
    if (!gate_.paused()) do_read();
  }

  void enqueue(OutMessage msg) {
    if (msg.binary) gate_.frame_queued();
    queue_.push_back(std::move(msg));
    if (queue_.size() == 1) do_write();
  }

  void do_write() {
    const OutMessage& front = queue_.front();
    ws_.binary(front.binary);
    ws_.async_write(net::buffer(front.payload),
                    beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) return;
    if (queue_.front().binary) gate_.frame_sent();
    queue_.pop_front();
    if (!queue_.empty()) {
      do_write();
      return;
    }
    if (closing_) {
      do_close();
      return;
    }
    if (!reading_ && !gate_.paused()) do_read();
  }

  void do_close() {
    ws_.async_close(websocket::close_reason(websocket::close_code::policy_error,
                                            "session fault"),
                    [self = shared_from_this()](beast::error_code) {});
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  ProtocolSession protocol_;
  std::deque<OutMessage> queue_;
  FlowGate gate_;
  bool reading_ = false;
  bool closing_ = false;
};

http::response<http::string_body> json_response(const http::request<http::string_body>& req,
                                                http::status status, std::string body) {
  http::response<http::string_body> res{status, req.version()};
  res.set(http::field::content_type, "application/json");
  res.set(http::field::access_control_allow_origin, "*");
  res.keep_alive(req.keep_alive());
  res.body() = std::move(body);
  res.prepare_payload();
  return res;
}

http::response<http::string_body> handle_request(const http::request<http::string_body>& req,
                                                 SignalRegistry& registry) {
  const auto target = req.target();
  if (target == "/presets" && req.method() == http::verb::get) {
    nlohmann::json presets = nlohmann::json::array();
    const SignalBuffer pilot = pilot_fragment();
    for (const auto& p : mapping_presets()) {
      presets.push_back({{"id", p.id},
                         {"samples_per_mm", p.samples_per_mm},
                         {"cycle_width_mm", 100.0 / p.samples_per_mm},
                         {"fragment_width_mm", p.mapping().fragment_width_mm(pilot)}});
    }
    nlohmann::json body = {{"presets", presets}, {"default_engine_rate", kDefaultLiveRateHz}};
    return json_response(req, http::status::ok, body.dump());
  }
  if (target == "/signal" && req.method() == http::verb::post) {
    try {
      const auto& b = req.body();
      const SignalBuffer buffer = decode_signal(std::span<const std::uint8_t>(
          reinterpret_cast<const std::uint8_t*>(b.data()), b.size()));
      const std::size_t length = buffer.size();
      const std::string id = registry.add(buffer);
      return json_response(req, http::status::ok,
                           nlohmann::json{{"signal_id", id}, {"length", length}}.dump());
    } catch (const Error& e) {
      return json_response(req, http::status::bad_request,
                           encode_error_json(to_string(e.code()), e.what()));
    }
  }
  if (target == "/session") {
    return json_response(req, http::status::upgrade_required,
                         encode_error_json("protocol-error", "WebSocket upgrade required"));
  }
  return json_response(req, http::status::not_found,
                       encode_error_json("not-found", std::string(target)));
}

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket&& socket, std::shared_ptr<SignalRegistry> registry)
      : stream_(std::move(socket)), registry_(std::move(registry)) {}

  void run() {
    net::dispatch(stream_.get_executor(),
                  beast::bind_front_handler(&HttpSession::do_read, shared_from_this()));
  }

 private:
  void do_read() {
    parser_.emplace();
    parser_->body_limit(kMaxUploadBytes);
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, *parser_,
                     beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
      return;
    }
    if (websocket::is_upgrade(parser_->get()) && parser_->get().target() == "/session") {
      stream_.expires_never();
      std::make_shared<WsSession>(stream_.release_socket(), registry_)
          ->run(parser_->release());
      return;
    }
    auto res = std::make_shared<http::response<http::string_body>>(
        handle_request(parser_->get(), *registry_));
    http::async_write(stream_, *res,
                      [self = shared_from_this(), res](beast::error_code wec, std::size_t) {
                        if (wec || !res->keep_alive()) {
                          self->stream_.socket().shutdown(tcp::socket::shutdown_send, wec);
                          return;
                        }
                        self->do_read();
                      });
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  std::optional<http::request_parser<http::string_body>> parser_;
  std::shared_ptr<SignalRegistry> registry_;
};

}  // namespace

struct Server::Impl {
  explicit Impl(ServerOptions opts)
      : options(std::move(opts)),
        ioc(std::max(1, options.threads)),
        acceptor(net::make_strand(ioc)),
        registry(std::make_shared<SignalRegistry>()) {}

  void do_accept() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec,
                                                        tcp::socket socket) {
      if (!ec) {
        // Frames are small and latency-bound; do not let Nagle batch them.
        beast::error_code opt_ec;
        socket.set_option(tcp::no_delay(true), opt_ec);
        std::make_shared<HttpSession>(std::move(socket), registry)->run();
      }
      if (acceptor.is_open()) do_accept();
    });
  }

  ServerOptions options;
  net::io_context ioc;
  tcp::acceptor acceptor;
  std::shared_ptr<SignalRegistry> registry;
  std::vector<std::thread> threads;
  std::uint16_t port = 0;
};

ServerOptions options_from_env() {
  ServerOptions o;
  if (const char* bind = std::getenv("KSF_BIND")) o.bind_address = bind;
  if (const char* port = std::getenv("KSF_PORT")) {
    o.port = static_cast<std::uint16_t>(std::strtoul(port, nullptr, 10));
  }
  return o;
}

Server::Server(ServerOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

Server::~Server() { stop(); }

std::uint16_t Server::start() {
  auto& a = impl_->acceptor;
  const tcp::endpoint endpoint(net::ip::make_address(impl_->options.bind_address),
                               impl_->options.port);
  a.open(endpoint.protocol());
  a.set_option(net::socket_base::reuse_address(true));
  a.bind(endpoint);
  a.listen(net::socket_base::max_listen_connections);
  impl_->port = a.local_endpoint().port();
  impl_->do_accept();
  for (int i = 0; i < std::max(1, impl_->options.threads); ++i) {
    impl_->threads.emplace_back([this] { impl_->ioc.run(); });
  }
  return impl_->port;
}

void Server::stop() {
  if (!impl_) return;
  impl_->ioc.stop();
  for (auto& t : impl_->threads) {
    if (t.joinable()) t.join();
  }
  impl_->threads.clear();
}

void Server::wait() {
  net::signal_set signals(impl_->ioc, SIGINT, SIGTERM);
  signals.async_wait([this](beast::error_code, int) { impl_->ioc.stop(); });
  for (auto& t : impl_->threads) {
    if (t.joinable()) t.join();
  }
  impl_->threads.clear();
}

std::uint16_t Server::port() const noexcept { return impl_->port; }

std::shared_ptr<SignalRegistry> Server::registry() const noexcept { return impl_->registry; }

}  // namespace ksf::service
