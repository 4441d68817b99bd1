#pragma once

// WebSocket + static HTTP front end for a Session.
//
// One physics thread owns the session and steps it at 1/dt. Network I/O runs
// on its own thread; the two meet only through a mutex-guarded inbox of
// client messages and a single "latest tick" slot per connection, so a slow
// client drops intermediate ticks instead of queueing them.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "encounter/io.hpp"

namespace encounter {

struct ServerOptions {
  std::string address = "127.0.0.1";
  std::uint16_t port = 8080;  // 0 picks a free port
  std::optional<std::filesystem::path> web_root;
  std::optional<std::filesystem::path> record_dir;
  // Stop on SIGINT/SIGTERM (the CLI wants this; tests do not).
  bool handle_signals = false;
};

class Server {
 public:
  /// Binds immediately; throws std::runtime_error when the port is taken.
  Server(Scenario scenario, ServerOptions options);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::uint16_t port() const;

  /// Starts the physics and network threads and returns.
  void start();
  /// Blocks until stop() is called from another thread or a signal handler.
  void wait();
  void stop();

 private:
  friend class Connection;
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace encounter
