#include "mep/tracker/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mep/error.hpp"
#include "mep/geo/kernels.hpp"

namespace mep::tracker {

std::string_view to_string(EntityKind kind) {
  switch (kind) {
    case EntityKind::player: return "player";
    case EntityKind::npc: return "npc";
    case EntityKind::item: return "item";
  }
  return "player";
}

std::optional<EntityKind> parse_entity_kind(std::string_view s) {
  if (s == "player") return EntityKind::player;
  if (s == "npc") return EntityKind::npc;
  if (s == "item") return EntityKind::item;
  return std::nullopt;
}

std::string_view to_string(FixSource source) {
  return source == FixSource::simulator ? "simulator" : "client_request";
}

// ---------------------------------------------------------------------------
// Snapshot

std::size_t Snapshot::index_of(std::string_view entity_id) const {
  const auto it = std::lower_bound(
      entities_.begin(), entities_.end(), entity_id,
      [](const std::shared_ptr<const TrackedEntity>& e, std::string_view id) {
        return e->entity_id < id;
      });
  if (it != entities_.end() && (*it)->entity_id == entity_id) {
    return static_cast<std::size_t>(it - entities_.begin());
  }
  return entities_.size();
}

const TrackedEntity* Snapshot::find(std::string_view entity_id) const {
  const std::size_t i = index_of(entity_id);
  return i < entities_.size() ? entities_[i].get() : nullptr;
}

void Snapshot::set_position(std::size_t i) {
  const auto& fix = entities_[i]->last_fix;
  if (fix) {
    const geo::UnitVector u = geo::to_unit_vector(fix->point);
    x_[i] = u.x;
    y_[i] = u.y;
    z_[i] = u.z;
  } else {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    x_[i] = y_[i] = z_[i] = nan;
  }
}

std::vector<NearbyHit> Snapshot::query_nearby(const geo::GeoPoint& center, double radius_m,
                                              KindFilter kinds) const {
  if (!(radius_m >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "radius must be nonnegative");
  }
  // The chord prefilter is a strict superset of the exact answer: the limit
  // is padded well beyond the rounding error of either distance formula.
  // Exact membership is then decided by haversine alone.
  const double limit = geo::chord2_for_distance(radius_m) * (1.0 + 1e-9) + 1e-18;
  const geo::kernels::UnitVectorsSoA soa{x_, y_, z_};
  std::vector<std::uint32_t> candidates(entities_.size());
  const std::size_t n = geo::kernels::active_kernels().select_within(
      soa, geo::to_unit_vector(center), limit, candidates);

  std::vector<NearbyHit> hits;
  for (std::size_t c = 0; c < n; ++c) {
    const TrackedEntity& e = *entities_[candidates[c]];
    if (!kinds.accepts(e.kind)) continue;
    const double d = geo::haversine_distance(center, e.last_fix->point);
    if (d <= radius_m) hits.push_back({e.entity_id, e.kind, d});
  }
  std::sort(hits.begin(), hits.end(), [](const NearbyHit& a, const NearbyHit& b) {
    if (a.distance_m != b.distance_m) return a.distance_m < b.distance_m;
    return a.entity_id < b.entity_id;
  });
  return hits;
}

std::vector<const TrackedEntity*> Snapshot::query_bbox(const BoundingBox& box,
                                                       KindFilter kinds) const {
  std::vector<const TrackedEntity*> out;
  for (const auto& e : entities_) {
    if (!e->last_fix || !kinds.accepts(e->kind)) continue;
    const auto& p = e->last_fix->point;
    if (p.lat_deg() >= box.min_lat && p.lat_deg() <= box.max_lat && p.lon_deg() >= box.min_lon &&
        p.lon_deg() <= box.max_lon) {
      out.push_back(e.get());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tracker

Tracker::Tracker(std::size_t history_cap) {
  if (history_cap == 0) throw Error(ErrorCode::InvalidArgument, "history_cap must be positive");
  auto snap = std::make_shared<Snapshot>();
  snap->history_cap_ = history_cap;
  current_ = std::move(snap);
}

std::shared_ptr<const Snapshot> Tracker::snapshot() const {
  std::lock_guard lock(publish_mu_);
  return current_;
}

void Tracker::publish(std::shared_ptr<const Snapshot> next) {
  std::lock_guard lock(publish_mu_);
  current_ = std::move(next);
}

void Tracker::restore(std::shared_ptr<const Snapshot> snap) {
  std::lock_guard wlock(write_mu_);
  publish(std::move(snap));
}

TrackedEntity Tracker::register_entity(const std::string& entity_id, EntityKind kind,
                                       std::optional<LocationFix> initial_fix) {
  if (entity_id.empty()) throw Error(ErrorCode::InvalidArgument, "entity id must not be empty");
  if (initial_fix) {
    if (!initial_fix->consent) {
      throw Error(ErrorCode::ConsentRequired, "fix for " + entity_id + " lacks consent");
    }
    if (initial_fix->timestamp_ms <= 0) {
      throw Error(ErrorCode::InvalidArgument, "fix timestamp must be positive");
    }
  }

  std::lock_guard wlock(write_mu_);
  const auto cur = snapshot();
  const std::size_t existing = cur->index_of(entity_id);
  if (existing < cur->size()) {
    throw Error(ErrorCode::DuplicateEntity, "entity already registered: " + entity_id);
  }

  auto entity = std::make_shared<TrackedEntity>();
  entity->entity_id = entity_id;
  entity->kind = kind;
  if (initial_fix) {
    entity->last_fix = initial_fix;
    entity->history.push_back(*initial_fix);
  }

  auto next = std::make_shared<Snapshot>(*cur);
  const auto pos = std::lower_bound(
      next->entities_.begin(), next->entities_.end(), entity_id,
      [](const std::shared_ptr<const TrackedEntity>& e, const std::string& id) {
        return e->entity_id < id;
      });
  const auto idx = pos - next->entities_.begin();
  next->entities_.insert(pos, entity);
  next->x_.insert(next->x_.begin() + idx, 0.0);
  next->y_.insert(next->y_.begin() + idx, 0.0);
  next->z_.insert(next->z_.begin() + idx, 0.0);
  next->set_position(static_cast<std::size_t>(idx));
  if (initial_fix) ++next->fixes_stored_;

  TrackedEntity result = *entity;
  publish(std::move(next));
  return result;
}

TrackedEntity Tracker::update_location(const std::string& entity_id, const LocationFix& fix) {
  if (!fix.consent) {
    throw Error(ErrorCode::ConsentRequired, "location update for " + entity_id + " lacks consent");
  }
  if (fix.timestamp_ms <= 0) {
    throw Error(ErrorCode::InvalidArgument, "fix timestamp must be positive");
  }

  std::lock_guard wlock(write_mu_);
  const auto cur = snapshot();
  const std::size_t i = cur->index_of(entity_id);
  if (i == cur->size()) throw Error(ErrorCode::UnknownEntity, "unknown entity: " + entity_id);

  const TrackedEntity& old = *cur->entities_[i];
  if (old.last_fix && fix.timestamp_ms < old.last_fix->timestamp_ms) {
    throw Error(ErrorCode::StaleTimestamp,
                "fix at " + std::to_string(fix.timestamp_ms) + " is older than stored " +
                    std::to_string(old.last_fix->timestamp_ms));
  }

  auto entity = std::make_shared<TrackedEntity>(old);
  entity->last_fix = fix;
  entity->history.push_back(fix);
  while (entity->history.size() > cur->history_cap_) entity->history.pop_front();

  auto next = std::make_shared<Snapshot>(*cur);
  next->entities_[i] = entity;
  next->set_position(i);
  ++next->fixes_stored_;

  TrackedEntity result = *entity;
  publish(std::move(next));
  return result;
}

void Tracker::detach(const std::string& entity_id) {
  std::lock_guard wlock(write_mu_);
  const auto cur = snapshot();
  const std::size_t i = cur->index_of(entity_id);
  if (i == cur->size()) throw Error(ErrorCode::UnknownEntity, "unknown entity: " + entity_id);
  if (cur->entities_[i]->kind == EntityKind::player) {
    throw Error(ErrorCode::InvalidArgument, "players cannot be detached");
  }

  auto entity = std::make_shared<TrackedEntity>(*cur->entities_[i]);
  entity->last_fix.reset();
  entity->history.clear();
  auto next = std::make_shared<Snapshot>(*cur);
  next->entities_[i] = entity;
  next->set_position(i);
  publish(std::move(next));
}

TrackedEntity Tracker::get_state(std::string_view entity_id) const {
  const auto snap = snapshot();
  const TrackedEntity* e = snap->find(entity_id);
  if (!e) throw Error(ErrorCode::UnknownEntity, "unknown entity: " + std::string(entity_id));
  return *e;
}

}  // namespace mep::tracker
