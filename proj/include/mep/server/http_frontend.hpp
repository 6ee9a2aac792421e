#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "mep/server/app.hpp"

namespace httplib {
class Server;
}

namespace mep::server {

// Serves an App over HTTP/1.1. Listens only; never opens a connection of its
// own. Responses carry permissive CORS headers so a browser client served
// from elsewhere can talk to it.
class HttpFrontend {
 public:
  explicit HttpFrontend(App& app, std::optional<std::filesystem::path> static_dir = std::nullopt);
  ~HttpFrontend();
  HttpFrontend(const HttpFrontend&) = delete;
  HttpFrontend& operator=(const HttpFrontend&) = delete;

  // Port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);

  void serve();  // blocks until stop()
  void start();  // serve() on a background thread
  void stop();

 private:
  App& app_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

// "host:port" -> pair; a bare port means 127.0.0.1.
std::pair<std::string, int> parse_listen_address(const std::string& spec);

}  // namespace mep::server
