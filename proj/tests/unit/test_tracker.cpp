#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <random>
#include <thread>

#include <nlohmann/json.hpp>

#include "mep/error.hpp"
#include "mep/tracker/tracker.hpp"

using namespace mep::tracker;
using mep::geo::GeoPoint;
using mep::ErrorCode;

namespace {

LocationFix fix(double lat, double lon, std::int64_t ts, bool consent = true) {
  return LocationFix{GeoPoint(lat, lon), ts, consent, FixSource::client_request};
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const mep::Error& e) {
    return e.code();
  }
  FAIL("expected mep::Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("register with and without a fix") {
  Tracker t;
  const auto npc = t.register_entity("npc:riverkeeper", EntityKind::npc,
                                     LocationFix{{35.0301, 135.7717}, 1, true, FixSource::simulator});
  REQUIRE(npc.last_fix);
  CHECK(npc.last_fix->point == GeoPoint(35.0301, 135.7717));
  CHECK(npc.history.size() == 1);

  const auto p = t.register_entity("player:p1", EntityKind::player);
  CHECK_FALSE(p.last_fix);
  CHECK(code_of([&] { t.register_entity("player:p1", EntityKind::player); }) ==
        ErrorCode::DuplicateEntity);
  CHECK(t.snapshot()->size() == 2);
}

TEST_CASE("update_location errors leave state untouched") {
  Tracker t;
  t.register_entity("p", EntityKind::player);
  t.update_location("p", fix(35, 135, 100));
  const auto before = t.snapshot();

  CHECK(code_of([&] { t.update_location("p", fix(35.1, 135, 200, false)); }) ==
        ErrorCode::ConsentRequired);
  CHECK(code_of([&] { t.update_location("p", fix(35.1, 135, 99)); }) == ErrorCode::StaleTimestamp);
  CHECK(code_of([&] { t.update_location("ghost", fix(35.1, 135, 300)); }) ==
        ErrorCode::UnknownEntity);
  CHECK(t.snapshot() == before);
  CHECK(t.get_state("p").last_fix->timestamp_ms == 100);

  // equal timestamps are not stale
  t.update_location("p", fix(35.2, 135, 100));
  CHECK(t.get_state("p").history.size() == 2);
}

TEST_CASE("history is capped and keeps the newest fixes") {
  Tracker t(256);
  t.register_entity("p", EntityKind::player);
  std::deque<LocationFix> model;
  for (int i = 1; i <= 300; ++i) {
    const auto f = fix(35.0 + i * 1e-5, 135.0, i);
    t.update_location("p", f);
    model.push_back(f);
    if (model.size() > 256) model.pop_front();
  }
  const auto e = t.get_state("p");
  CHECK(e.history.size() == 256);
  CHECK(e.history.front().timestamp_ms == 45);
  CHECK(e.history == model);
  CHECK(*e.last_fix == e.history.back());
  CHECK(t.fixes_stored() == 300);
}

TEST_CASE("get_state of an unknown id") {
  Tracker t;
  CHECK(code_of([&] { t.get_state("nobody"); }) == ErrorCode::UnknownEntity);
}

TEST_CASE("query_nearby closed ball, ordering and kind filter") {
  Tracker t;
  const GeoPoint c{35.0, 135.0};
  t.register_entity("b", EntityKind::item, LocationFix{c, 1, true, FixSource::simulator});
  t.register_entity("a", EntityKind::npc, LocationFix{c, 1, true, FixSource::simulator});
  t.register_entity("far", EntityKind::npc, LocationFix{{35.1, 135.0}, 1, true, FixSource::simulator});
  t.register_entity("nofix", EntityKind::player);

  CHECK(t.query_nearby({10, 10}, 100).empty());
  const auto hits = t.query_nearby(c, 0.0);
  REQUIRE(hits.size() == 2);
  CHECK(hits[0].entity_id == "a");
  CHECK(hits[1].entity_id == "b");
  CHECK(hits[0].distance_m == 0.0);

  const auto items = t.query_nearby(c, 50000, {EntityKind::item});
  REQUIRE(items.size() == 1);
  CHECK(items[0].entity_id == "b");
  CHECK(t.query_nearby(c, 50000).size() == 3);
  CHECK(code_of([&] { t.query_nearby(c, -1); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("query_nearby equals brute force") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> lat(34.95, 35.05), lon(135.70, 135.80), rad(0, 3000);
  Tracker t;
  std::vector<std::pair<std::string, GeoPoint>> all;
  for (int i = 0; i < 300; ++i) {
    const std::string id = "e" + std::to_string(i);
    const GeoPoint p{lat(rng), lon(rng)};
    t.register_entity(id, EntityKind::item, LocationFix{p, 1, true, FixSource::simulator});
    all.emplace_back(id, p);
  }
  for (int q = 0; q < 50; ++q) {
    const GeoPoint c{lat(rng), lon(rng)};
    const double r = rad(rng);
    std::vector<NearbyHit> want;
    for (const auto& [id, p] : all) {
      const double d = mep::geo::haversine_distance(c, p);
      if (d <= r) want.push_back({id, EntityKind::item, d});
    }
    std::sort(want.begin(), want.end(), [](const auto& a, const auto& b) {
      return a.distance_m != b.distance_m ? a.distance_m < b.distance_m : a.entity_id < b.entity_id;
    });
    CHECK(t.query_nearby(c, r) == want);
  }
}

TEST_CASE("bbox listing") {
  Tracker t;
  t.register_entity("in", EntityKind::item, LocationFix{{35.0, 135.0}, 1, true, FixSource::simulator});
  t.register_entity("edge", EntityKind::item, LocationFix{{35.1, 135.1}, 1, true, FixSource::simulator});
  t.register_entity("out", EntityKind::item, LocationFix{{36.0, 135.0}, 1, true, FixSource::simulator});
  const auto r = t.snapshot()->query_bbox({34.9, 134.9, 35.1, 135.1});
  REQUIRE(r.size() == 2);
  CHECK(r[0]->entity_id == "edge");
  CHECK(r[1]->entity_id == "in");
}

TEST_CASE("detach takes an item off the map") {
  Tracker t;
  t.register_entity("flower#0", EntityKind::item, LocationFix{{35, 135}, 1, true, FixSource::simulator});
  t.register_entity("p", EntityKind::player);
  t.detach("flower#0");
  CHECK(t.query_nearby({35, 135}, 10).empty());
  CHECK_FALSE(t.get_state("flower#0").last_fix);
  CHECK(code_of([&] { t.detach("p"); }) == ErrorCode::InvalidArgument);
  // it can be placed again later
  t.update_location("flower#0", LocationFix{{35, 135.001}, 5, true, FixSource::simulator});
  CHECK(t.query_nearby({35, 135.001}, 1).size() == 1);
}

TEST_CASE("replaying the same updates gives identical state; JSON round trip") {
  auto run = [] {
    Tracker t(8);
    t.register_entity("p", EntityKind::player);
    t.register_entity("n", EntityKind::npc, LocationFix{{35, 135}, 1, true, FixSource::simulator});
    for (int i = 1; i <= 20; ++i) t.update_location("p", fix(35 + i * 1e-4, 135, i * 1000));
    return t.snapshot();
  };
  const auto a = run();
  const auto b = run();
  CHECK(to_json(*a).dump() == to_json(*b).dump());
  const auto back = snapshot_from_json(to_json(*a));
  CHECK(to_json(*back).dump() == to_json(*a).dump());
  CHECK(back->history_cap() == 8);
  CHECK(back->fixes_stored() == a->fixes_stored());
  CHECK(back->query_nearby({35.002, 135}, 1).size() == 1);
}

TEST_CASE("readers see consistent snapshots while a writer runs") {
  Tracker t(4);
  t.register_entity("p", EntityKind::player);
  std::atomic<bool> stop{false};
  std::atomic<long> torn{0};
  std::thread writer([&] {
    for (int i = 1; i <= 5000; ++i) t.update_location("p", fix(35, 135, i));
    stop = true;
  });
  std::vector<std::thread> readers;
  for (int r = 0; r < 3; ++r) {
    readers.emplace_back([&] {
      while (!stop) {
        const auto e = t.get_state("p");
        if (e.last_fix && !(*e.last_fix == e.history.back())) ++torn;
        for (std::size_t k = 1; k < e.history.size(); ++k) {
          if (e.history[k].timestamp_ms < e.history[k - 1].timestamp_ms) ++torn;
        }
      }
    });
  }
  writer.join();
  for (auto& th : readers) th.join();
  CHECK(torn == 0);
  CHECK(t.get_state("p").last_fix->timestamp_ms == 5000);
}
