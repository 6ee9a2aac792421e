#include <nlohmann/json.hpp>

#include "mep/error.hpp"
#include "mep/tracker/tracker.hpp"

namespace mep::tracker {

using nlohmann::json;

json to_json(const LocationFix& fix) {
  return json{{"lat", fix.point.lat_deg()},
              {"lon", fix.point.lon_deg()},
              {"timestamp_ms", fix.timestamp_ms},
              {"consent", fix.consent},
              {"source", to_string(fix.source)}};
}

LocationFix fix_from_json(const json& j) {
  LocationFix fix{geo::GeoPoint(j.at("lat").get<double>(), j.at("lon").get<double>()),
                  j.at("timestamp_ms").get<std::int64_t>(), j.at("consent").get<bool>(),
                  FixSource::client_request};
  if (j.contains("source") && j.at("source").get<std::string>() == "simulator") {
    fix.source = FixSource::simulator;
  }
  return fix;
}

json to_json(const TrackedEntity& e, bool with_history) {
  json j{{"entity_id", e.entity_id},
         {"kind", to_string(e.kind)},
         {"last_fix", e.last_fix ? to_json(*e.last_fix) : json(nullptr)},
         {"history_size", e.history.size()}};
  if (with_history) {
    json h = json::array();
    for (const auto& f : e.history) h.push_back(to_json(f));
    j["history"] = std::move(h);
  }
  return j;
}

json to_json(const Snapshot& snap) {
  json entities = json::array();
  for (std::size_t i = 0; i < snap.size(); ++i) entities.push_back(to_json(snap.at(i), true));
  return json{{"history_cap", snap.history_cap()},
              {"fixes_stored", snap.fixes_stored()},
              {"entities", std::move(entities)}};
}

std::shared_ptr<const Snapshot> snapshot_from_json(const json& j) {
  auto snap = std::make_shared<Snapshot>();
  snap->history_cap_ = j.at("history_cap").get<std::size_t>();
  snap->fixes_stored_ = j.at("fixes_stored").get<std::uint64_t>();
  for (const auto& je : j.at("entities")) {
    auto e = std::make_shared<TrackedEntity>();
    e->entity_id = je.at("entity_id").get<std::string>();
    const auto kind = parse_entity_kind(je.at("kind").get<std::string>());
    if (!kind) throw Error(ErrorCode::CorruptRecord, "bad entity kind in snapshot");
    e->kind = *kind;
    for (const auto& jf : je.at("history")) e->history.push_back(fix_from_json(jf));
    if (!je.at("last_fix").is_null()) e->last_fix = fix_from_json(je.at("last_fix"));
    if (!snap->entities_.empty() && !(snap->entities_.back()->entity_id < e->entity_id)) {
      throw Error(ErrorCode::CorruptRecord, "snapshot entities not sorted by id");
    }
    snap->entities_.push_back(std::move(e));
  }
  snap->x_.resize(snap->entities_.size());
  snap->y_.resize(snap->entities_.size());
  snap->z_.resize(snap->entities_.size());
  for (std::size_t i = 0; i < snap->entities_.size(); ++i) snap->set_position(i);
  return snap;
}

}  // namespace mep::tracker
