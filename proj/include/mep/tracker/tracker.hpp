#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mep/geo/geo.hpp"

namespace mep::tracker {

enum class EntityKind { player, npc, item };
enum class FixSource { client_request, simulator };

std::string_view to_string(EntityKind kind);
std::optional<EntityKind> parse_entity_kind(std::string_view s);
std::string_view to_string(FixSource source);

struct LocationFix {
  geo::GeoPoint point;
  std::int64_t timestamp_ms = 0;
  bool consent = false;
  FixSource source = FixSource::client_request;

  friend bool operator==(const LocationFix&, const LocationFix&) = default;
};

// A player, NPC or item as seen by the location middleware.
struct TrackedEntity {
  std::string entity_id;
  EntityKind kind = EntityKind::player;
  std::optional<LocationFix> last_fix;
  std::deque<LocationFix> history;  // most recent last

  friend bool operator==(const TrackedEntity&, const TrackedEntity&) = default;
};

// Bit set over EntityKind; empty means "all kinds".
class KindFilter {
 public:
  KindFilter() = default;
  KindFilter(std::initializer_list<EntityKind> kinds) {
    for (auto k : kinds) add(k);
  }
  void add(EntityKind k) { bits_ |= bit(k); }
  bool accepts(EntityKind k) const { return bits_ == 0 || (bits_ & bit(k)) != 0; }

 private:
  static unsigned bit(EntityKind k) { return 1u << static_cast<unsigned>(k); }
  unsigned bits_ = 0;
};

struct NearbyHit {
  std::string entity_id;
  EntityKind kind;
  double distance_m;

  friend bool operator==(const NearbyHit&, const NearbyHit&) = default;
};

struct BoundingBox {
  double min_lat, min_lon, max_lat, max_lon;
};

// Immutable point-in-time view of every tracked entity. Queries against one
// snapshot never observe a concurrent write.
class Snapshot {
 public:
  const TrackedEntity* find(std::string_view entity_id) const;
  std::size_t size() const noexcept { return entities_.size(); }
  const TrackedEntity& at(std::size_t i) const { return *entities_[i]; }
  std::uint64_t fixes_stored() const noexcept { return fixes_stored_; }
  std::size_t history_cap() const noexcept { return history_cap_; }

  // Entities whose last fix lies within radius_m of center, nearest first,
  // ties by entity_id. Throws InvalidArgument for a negative radius.
  std::vector<NearbyHit> query_nearby(const geo::GeoPoint& center, double radius_m,
                                      KindFilter kinds = {}) const;

  // Entities whose last fix lies inside the box (inclusive), by entity_id.
  std::vector<const TrackedEntity*> query_bbox(const BoundingBox& box, KindFilter kinds = {}) const;

 private:
  friend class Tracker;
  friend std::shared_ptr<const Snapshot> snapshot_from_json(const nlohmann::json&);

  std::size_t index_of(std::string_view entity_id) const;  // size() when absent
  void set_position(std::size_t i);

  std::size_t history_cap_ = 256;
  std::uint64_t fixes_stored_ = 0;
  std::vector<std::shared_ptr<const TrackedEntity>> entities_;  // sorted by entity_id
  std::vector<double> x_, y_, z_;                               // NaN when no fix
};

nlohmann::json to_json(const Snapshot& snap);
std::shared_ptr<const Snapshot> snapshot_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrackedEntity& e, bool with_history);
nlohmann::json to_json(const LocationFix& fix);
LocationFix fix_from_json(const nlohmann::json& j);

// Registry of mobile and virtual entities. Location arrives only through
// update_location; nothing here ever asks a client for its position.
//
// Writers are serialized; readers work on published snapshots and never wait
// for a writer to finish.
class Tracker {
 public:
  explicit Tracker(std::size_t history_cap = 256);

  TrackedEntity register_entity(const std::string& entity_id, EntityKind kind,
                                std::optional<LocationFix> initial_fix = std::nullopt);

  // Throws UnknownEntity, ConsentRequired or StaleTimestamp; state is
  // untouched on any error.
  TrackedEntity update_location(const std::string& entity_id, const LocationFix& fix);

  // Takes a virtual entity off the map (an item picked up by a player): the
  // last fix and history are cleared so spatial queries no longer see it.
  void detach(const std::string& entity_id);

  TrackedEntity get_state(std::string_view entity_id) const;

  std::vector<NearbyHit> query_nearby(const geo::GeoPoint& center, double radius_m,
                                      KindFilter kinds = {}) const {
    return snapshot()->query_nearby(center, radius_m, kinds);
  }

  std::shared_ptr<const Snapshot> snapshot() const;
  void restore(std::shared_ptr<const Snapshot> snap);

  std::size_t history_cap() const { return snapshot()->history_cap(); }
  std::uint64_t fixes_stored() const { return snapshot()->fixes_stored(); }

 private:
  void publish(std::shared_ptr<const Snapshot> next);

  std::mutex write_mu_;
  mutable std::mutex publish_mu_;
  std::shared_ptr<const Snapshot> current_;
};

}  // namespace mep::tracker
