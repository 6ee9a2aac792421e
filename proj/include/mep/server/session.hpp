#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <string>

#include "mep/engine/types.hpp"

namespace mep::server {

inline constexpr std::int64_t kSessionIdleLimitMs = 24LL * 3600 * 1000;

struct Session {
  std::string token;  // 128 random bits, hex
  engine::PlayerId player_id;
  std::int64_t created_ms = 0;
  std::int64_t last_seen_ms = 0;
};

// Bearer-token sessions. Kept in memory only: they are never journaled, so a
// restarted server forgets them and players simply open a new one.
class SessionStore {
 public:
  // A seed makes tokens reproducible (tests); otherwise random_device.
  explicit SessionStore(std::optional<std::uint64_t> seed = std::nullopt,
                        std::int64_t idle_limit_ms = kSessionIdleLimitMs);

  // Throws SessionActive when the player already holds a live session.
  Session open(const engine::PlayerId& player_id, std::int64_t now_ms);

  // Player behind a live token; refreshes its idle timer. Expired tokens are
  // dropped and rejected.
  std::optional<engine::PlayerId> authenticate(const std::string& token, std::int64_t now_ms);

  bool has_live_session(const engine::PlayerId& player_id, std::int64_t now_ms) const;

 private:
  bool expired(const Session& s, std::int64_t now_ms) const {
    return now_ms - s.last_seen_ms > idle_limit_ms_;
  }
  std::string next_token();

  mutable std::mutex mu_;
  std::mt19937_64 rng_;
  std::int64_t idle_limit_ms_;
  std::map<std::string, Session> by_token_;
  std::map<engine::PlayerId, std::string> by_player_;
};

}  // namespace mep::server
