#include "mep/server/session.hpp"

#include <cstdio>

#include "mep/error.hpp"

namespace mep::server {

namespace {

std::uint64_t seed_from_device() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

}  // namespace

SessionStore::SessionStore(std::optional<std::uint64_t> seed, std::int64_t idle_limit_ms)
    : rng_(seed ? *seed : seed_from_device()), idle_limit_ms_(idle_limit_ms) {}

std::string SessionStore::next_token() {
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng_()),
                static_cast<unsigned long long>(rng_()));
  return buf;
}

Session SessionStore::open(const engine::PlayerId& player_id, std::int64_t now_ms) {
  std::lock_guard lock(mu_);
  if (const auto it = by_player_.find(player_id); it != by_player_.end()) {
    const Session& old = by_token_.at(it->second);
    if (!expired(old, now_ms)) {
      throw Error(ErrorCode::SessionActive, "player " + player_id + " already has a live session");
    }
    by_token_.erase(it->second);
    by_player_.erase(it);
  }
  std::string token;
  do token = next_token();
  while (by_token_.contains(token));
  Session s{token, player_id, now_ms, now_ms};
  by_token_.emplace(token, s);
  by_player_[player_id] = token;
  return s;
}

std::optional<engine::PlayerId> SessionStore::authenticate(const std::string& token,
                                                           std::int64_t now_ms) {
  std::lock_guard lock(mu_);
  const auto it = by_token_.find(token);
  if (it == by_token_.end()) return std::nullopt;
  if (expired(it->second, now_ms)) {
    by_player_.erase(it->second.player_id);
    by_token_.erase(it);
    return std::nullopt;
  }
  it->second.last_seen_ms = std::max(it->second.last_seen_ms, now_ms);
  return it->second.player_id;
}

bool SessionStore::has_live_session(const engine::PlayerId& player_id, std::int64_t now_ms) const {
  std::lock_guard lock(mu_);
  const auto it = by_player_.find(player_id);
  return it != by_player_.end() && !expired(by_token_.at(it->second), now_ms);
}

}  // namespace mep::server
