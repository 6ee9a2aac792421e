#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "mep/clock.hpp"
#include "mep/server/app.hpp"

namespace httplib {
class Client;
}

namespace mep::sim {

// How bots reach the server. Paths are given decoded ("/api/game/item/flower#3/collect");
// the HTTP transport percent-encodes them.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual server::Response send(const server::Request& req) = 0;
  // Moves the server's clock to simulated time.
  virtual void set_time(std::int64_t now_ms) = 0;
};

// Calls App::handle directly; shares the App's manual clock.
class InProcessTransport final : public Transport {
 public:
  InProcessTransport(server::App& app, ManualClock& clock) : app_(app), clock_(clock) {}
  server::Response send(const server::Request& req) override { return app_.handle(req); }
  void set_time(std::int64_t now_ms) override { clock_.set(now_ms); }

 private:
  server::App& app_;
  ManualClock& clock_;
};

// Real HTTP. With a local clock (embedded server) time is set directly;
// otherwise through POST /api/admin/clock, which needs a server started with
// --manual-clock.
class HttpTransport final : public Transport {
 public:
  HttpTransport(const std::string& base_url, ManualClock* local_clock = nullptr);
  ~HttpTransport() override;
  server::Response send(const server::Request& req) override;
  void set_time(std::int64_t now_ms) override;

 private:
  std::unique_ptr<httplib::Client> client_;
  ManualClock* local_clock_;
};

std::string percent_encode(std::string_view s);

}  // namespace mep::sim
