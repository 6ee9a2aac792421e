#include "mep/server/http_frontend.hpp"

#include <httplib.h>

#include "mep/error.hpp"

namespace mep::server {

namespace {

Request to_request(const httplib::Request& in) {
  Request r;
  r.method = in.method;
  r.path = in.path;
  for (const auto& [k, v] : in.params) r.query.emplace(k, v);
  r.body = in.body;
  const std::string auth = in.get_header_value("Authorization");
  constexpr std::string_view bearer = "Bearer ";
  if (auth.rfind(bearer, 0) == 0) r.token = auth.substr(bearer.size());
  return r;
}

}  // namespace

HttpFrontend::HttpFrontend(App& app, std::optional<std::filesystem::path> static_dir)
    : app_(app), server_(std::make_unique<httplib::Server>()) {
  server_->set_tcp_nodelay(true);
  server_->set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Authorization, Content-Type"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    const Response out = app_.handle(to_request(req));
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
  };
  server_->Get(R"(/api/.*)", handler);
  server_->Post(R"(/api/.*)", handler);
  server_->Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  if (static_dir) server_->set_mount_point("/", static_dir->string());
  server_->set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    const Response out = error_response(Error(ErrorCode::NoRoute, "no endpoint " + req.method + " " + req.path));
    res.set_content(out.body.dump(), "application/json");
  });
}

HttpFrontend::~HttpFrontend() { stop(); }

int HttpFrontend::bind(const std::string& host, int port) {
  if (port == 0) {
    const int p = server_->bind_to_any_port(host);
    if (p < 0) throw std::runtime_error("cannot bind " + host);
    return p;
  }
  if (!server_->bind_to_port(host, port)) {
    throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpFrontend::serve() { server_->listen_after_bind(); }

void HttpFrontend::start() {
  thread_ = std::thread([this] { serve(); });
  server_->wait_until_ready();
}

void HttpFrontend::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::pair<std::string, int> parse_listen_address(const std::string& spec) {
  const auto colon = spec.rfind(':');
  std::string host = "127.0.0.1";
  std::string port = spec;
  if (colon != std::string::npos) {
    host = spec.substr(0, colon);
    port = spec.substr(colon + 1);
  }
  try {
    std::size_t used = 0;
    const int p = std::stoi(port, &used);
    if (used != port.size() || p < 0 || p > 65535) throw std::out_of_range("port");
    return {host, p};
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, "bad listen address: " + spec);
  }
}

}  // namespace mep::server
