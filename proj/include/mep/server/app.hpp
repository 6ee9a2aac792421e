#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "mep/clock.hpp"
#include "mep/engine/command.hpp"
#include "mep/gamedef/gamedef.hpp"
#include "mep/server/journal.hpp"
#include "mep/server/session.hpp"

namespace mep::server {

struct Request {
  std::string method;  // "GET" or "POST"
  std::string path;    // already percent-decoded
  std::map<std::string, std::string> query;
  std::string body;
  std::string token;   // bearer token, empty when absent
};

struct Response {
  int status = 200;
  nlohmann::json body;
};

struct AppOptions {
  std::optional<std::filesystem::path> journal;  // none: in-memory only
  std::size_t snapshot_every = 1000;             // 0 disables snapshots
  bool durable = true;                           // fdatasync each append
  std::optional<std::uint64_t> seed;             // token RNG
  std::int64_t session_idle_ms = kSessionIdleLimitMs;
};

int http_status(ErrorCode code);
Response error_response(const Error& e);

// The request handler behind every transport. Thread-safe: mutations run one
// at a time through a single writer path (engine command, journal append,
// publish); reads work on the last published view and never wait for it.
class App {
 public:
  // Rebuilds the world from the journal when one exists (throwing its
  // DigestMismatch / JournalGap / CorruptRecord: a server must not serve a
  // history it cannot reproduce). `manual_clock`, when given, is the same
  // object as `clock` and enables POST /api/admin/clock.
  App(gamedef::GameDefinition def, const Clock& clock, AppOptions options = {},
      ManualClock* manual_clock = nullptr);

  Response handle(const Request& req);

  std::uint64_t last_seq() const;
  std::string state_digest() const;
  std::string full_digest() const;
  std::uint64_t fixes_stored() const;  // accepted location fixes, from the published view
  const gamedef::GameDefinition& definition() const { return def_; }

  // Test hook, null without a journal.
  JournalWriter* journal_writer() { return journal_.get(); }

  // Runs a command through the writer path exactly as an endpoint would.
  nlohmann::json execute(const engine::Command& cmd);

 private:
  struct View {
    std::shared_ptr<const engine::GameState> game;
    std::shared_ptr<const tracker::Snapshot> positions;
    std::uint64_t seq = 0;
    std::string digest;  // state_digest at seq
  };

  Response route(const Request& req, const nlohmann::json& body,
                 const std::optional<tracker::LocationFix>& location);
  nlohmann::json execute_locked(const engine::Command& cmd);
  engine::PlayerId require_player(const Request& req);
  Response open_session(const nlohmann::json& body);
  View view() const;
  void publish_locked(std::string digest);
  std::int64_t now() const { return clock_.now_ms(); }

  gamedef::GameDefinition def_;
  const Clock& clock_;
  ManualClock* manual_clock_;
  AppOptions options_;
  SessionStore sessions_;

  mutable std::mutex write_mu_;
  std::unique_ptr<engine::Engine> engine_;
  std::unique_ptr<JournalWriter> journal_;
  std::uint64_t seq_ = 0;

  mutable std::mutex view_mu_;
  View view_;
};

}  // namespace mep::server
