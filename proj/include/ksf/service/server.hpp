#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "ksf/session.hpp"

namespace ksf::service {

struct ServerOptions {
  std::string bind_address = "127.0.0.1";
  std::uint16_t port = 8080;  // 0 picks an ephemeral port
  int threads = 2;
};

/// Reads KSF_BIND and KSF_PORT, falling back to the defaults above.
ServerOptions options_from_env();

/// HTTP + WebSocket front end:
///   GET  /presets  mapping presets as JSON
///   POST /signal   raw f32 or WAV body, replies {"signal_id": ...}
///   GET  /session  WebSocket upgrade; speaks the ProtocolSession protocol
class Server {
 public:
  explicit Server(ServerOptions options);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts the worker threads; returns the bound port.
  std::uint16_t start();
  void stop();
  /// Blocks until stop() is called from another thread or a signal.
  void wait();

  std::uint16_t port() const noexcept;
  std::shared_ptr<SignalRegistry> registry() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ksf::service
