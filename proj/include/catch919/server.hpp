#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "catch919/session.hpp"

namespace catch919 {

struct ServerOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 7919;  // 0 picks a free port
  std::chrono::milliseconds heartbeat{100};
};

// WebSocket front end of a SimSession. Each text frame is one command; the
// sender gets an ack, and every client gets the new state after an accepted
// command and on each heartbeat.
class Server {
 public:
  Server(std::shared_ptr<SimSession> session, ServerOptions options = {});
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  unsigned short port() const;
  void start();  // serve on a background thread
  void run();    // serve on the calling thread until stop()
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace catch919
