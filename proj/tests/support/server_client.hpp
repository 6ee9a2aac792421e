#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "mep/server/app.hpp"

namespace mep::testing {

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("mep-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline nlohmann::json location(double lat, double lon, std::int64_t ts, bool consent = true) {
  return {{"lat", lat}, {"lon", lon}, {"timestamp_ms", ts}, {"consent", consent}};
}

// Calls an App directly with the wire-level request shape.
struct AppClient {
  server::App& app;
  std::string token;

  server::Response get(const std::string& path, std::map<std::string, std::string> query = {},
                       const nlohmann::json& body = nullptr) const {
    return app.handle({"GET", path, std::move(query), body.is_null() ? "" : body.dump(), token});
  }
  server::Response post(const std::string& path, const nlohmann::json& body = nlohmann::json::object()) const {
    return app.handle({"POST", path, {}, body.dump(), token});
  }

  // Opens a session for `player_id` and keeps its token.
  server::Response login(const std::string& player_id) {
    auto r = post("/api/session", {{"player_id", player_id}, {"display_name", player_id}});
    if (r.status == 200) token = r.body["token"].get<std::string>();
    return r;
  }
};

inline std::string error_code(const server::Response& r) {
  return r.body.contains("error") ? r.body["error"]["code"].get<std::string>() : std::string();
}

}  // namespace mep::testing
