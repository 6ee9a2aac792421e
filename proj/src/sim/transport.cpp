#include "mep/sim/transport.hpp"

#include <httplib.h>

#include "mep/error.hpp"

namespace mep::sim {

std::string percent_encode(std::string_view s) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  for (const unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~' || c == '/') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 15]);
    }
  }
  return out;
}

HttpTransport::HttpTransport(const std::string& base_url, ManualClock* local_clock)
    : client_(std::make_unique<httplib::Client>(base_url)), local_clock_(local_clock) {
  client_->set_keep_alive(true);
  client_->set_tcp_nodelay(true);
  client_->set_url_encode(false);
}

HttpTransport::~HttpTransport() = default;

server::Response HttpTransport::send(const server::Request& req) {
  std::string target = percent_encode(req.path);
  char sep = '?';
  for (const auto& [k, v] : req.query) {
    target += sep + percent_encode(k) + "=" + percent_encode(v);
    sep = '&';
  }
  httplib::Headers headers;
  if (!req.token.empty()) headers.emplace("Authorization", "Bearer " + req.token);
  httplib::Result res = req.method == "POST"
                            ? client_->Post(target, headers, req.body, "application/json")
                            : client_->Get(target, headers);
  if (!res) {
    throw std::runtime_error("HTTP request failed: " + httplib::to_string(res.error()));
  }
  server::Response out;
  out.status = res->status;
  out.body = nlohmann::json::parse(res->body, nullptr, false);
  if (out.body.is_discarded()) out.body = nullptr;
  return out;
}

void HttpTransport::set_time(std::int64_t now_ms) {
  if (local_clock_) {
    local_clock_->set(now_ms);
    return;
  }
  const auto r = send({"POST", "/api/admin/clock", {}, nlohmann::json{{"set_ms", now_ms}}.dump(), {}});
  if (r.status != 200) {
    throw Error(ErrorCode::InvalidArgument, "server refused the simulated clock; start it with --manual-clock");
  }
}

}  // namespace mep::sim
