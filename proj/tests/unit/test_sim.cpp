#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "mep/sim/harness.hpp"
#include "oracle_data.hpp"

using namespace mep::sim;
using mep::testing::games_path;

namespace {

mep::gamedef::GameDefinition game(const char* name) {
  return mep::gamedef::load_valid_definition(games_path(name));
}

Scenario scenario(const char* file) { return load_scenario(std::filesystem::path(games_path("scenarios")) / file); }

SimOptions in_process() {
  SimOptions o;
  o.mode = Mode::in_process;
  return o;
}

const BotReport& bot(const SimReport& r, const std::string& id) {
  for (const auto& b : r.bots) {
    if (b.player_id == id) return b;
  }
  FAIL("no bot " << id);
  throw;
}

}  // namespace

TEST_CASE("scenario files: JSON and XML forms") {
  const Scenario walk = scenario("river_of_flowers.json");
  const Scenario ride = scenario("river_of_flowers_cycle.xml");
  CHECK(walk.name == "river_of_flowers");
  CHECK(ride.name == "river_of_flowers_cycle");
  REQUIRE(walk.bots.size() == 1);
  REQUIRE(ride.bots.size() == 1);
  CHECK(walk.bots[0].speed_mps == kWalkMps);
  CHECK(ride.bots[0].speed_mps == kCycleMps);
  CHECK(walk.bots[0].track == ride.bots[0].track);
  REQUIRE(walk.bots[0].script.size() == ride.bots[0].script.size());
  for (std::size_t i = 0; i < walk.bots[0].script.size(); ++i) {
    const Action& a = walk.bots[0].script[i];
    const Action& b = ride.bots[0].script[i];
    CHECK(a.kind == b.kind);
    CHECK(a.distance_m == b.distance_m);
    CHECK(a.collect_kind == b.collect_kind);
    CHECK(a.npc_id == b.npc_id);
    CHECK(a.choices == b.choices);
    CHECK(a.quest_id == b.quest_id);
    CHECK(a.predicate.count == b.predicate.count);
  }
  for (const char* f : {"river_of_flowers.json", "river_of_flowers_cycle.xml", "consent_refused.json"}) {
    CHECK_NOTHROW(check_scenario(scenario(f), game("river_of_flowers")));
  }
  for (const char* f : {"rebus_pair.json", "rebus_trio.json"}) {
    CHECK_NOTHROW(check_scenario(scenario(f), game("kamo_rebus")));
  }
}

TEST_CASE("scenario checks reject what cannot run") {
  const auto def = game("river_of_flowers");
  auto s = scenario("river_of_flowers.json");
  SUBCASE("unknown npc") { s.bots[0].script[0].npc_id = "nobody"; }
  SUBCASE("zero speed") { s.bots[0].speed_mps = 0; }
  SUBCASE("negative tick") { s.bots[0].tick_s = -1; }
  SUBCASE("walk past the end") { s.bots[0].script[2].distance_m = 5000; }
  SUBCASE("unknown item kind") { s.bots[0].script[2].collect_kind = "mushroom"; }
  SUBCASE("unknown quest") { s.bots[0].script[1].quest_id = "nope"; }
  SUBCASE("duplicate bot") { s.bots.push_back(s.bots[0]); }
  CHECK_THROWS_AS(check_scenario(s, def), mep::Error);

  CHECK_THROWS_AS(scenario_from_json(nlohmann::json{{"name", "x"}}), mep::Error);
  CHECK_THROWS_AS(scenario_from_json(nlohmann::json::parse(
                      R"({"name":"x","bots":[{"player_id":"a","at":[1,2],"script":[{"dance":1}]}]})")),
                  mep::Error);
  CHECK_THROWS_AS(scenario_from_xml("<scenario name='x'><bot player-id='a' at-lat='1' at-lon='2'><fly/></bot></scenario>", "s.xml"),
                  mep::Error);
}

TEST_CASE("River of Flowers in process") {
  const SimReport r = run_scenario(scenario("river_of_flowers.json"), game("river_of_flowers"), in_process());
  INFO(to_json(r).dump(2));
  CHECK(r.ok);
  const BotReport& w = bot(r, "walker");
  CHECK(w.finished);
  CHECK(std::fabs(w.distance_m - 4000.0) <= 40.0);
  CHECK(std::fabs(w.distance_m - w.track_progress_m) <= 0.001 * w.track_progress_m);
  REQUIRE(w.completions.size() == 1);
  CHECK(w.completions[0].quest_id == "river-of-flowers");
  CHECK(w.consent_rejections == 0);
  CHECK(r.simulated_s == doctest::Approx(4000.0 / 1.4).epsilon(0.01));
}

TEST_CASE("the cyclist finishes sooner") {
  const SimReport r = run_scenario(scenario("river_of_flowers_cycle.xml"), game("river_of_flowers"), in_process());
  CHECK(r.ok);
  CHECK(r.simulated_s == doctest::Approx(4000.0 / 4.5).epsilon(0.01));
}

TEST_CASE("rebus scenarios") {
  const auto def = game("kamo_rebus");
  SUBCASE("pair") {
    const SimReport r = run_scenario(scenario("rebus_pair.json"), def, in_process());
    INFO(to_json(r).dump(2));
    CHECK(r.ok);
    CHECK(bot(r, "ann").completions.size() == 1);
    CHECK(bot(r, "ben").completions.size() == 1);
  }
  SUBCASE("trio: every 1- and 2-subset is rejected, the full group accepted") {
    const SimReport r = run_scenario(scenario("rebus_trio.json"), def, in_process());
    INFO(to_json(r).dump(2));
    CHECK(r.ok);
    long rejections = 0;
    for (const auto& b : r.bots) {
      for (const auto& a : b.assertions) rejections += a.message.find("INCOMPLETE_COVERAGE") != std::string::npos;
      CHECK(b.completions.size() == 1);
    }
    CHECK(rejections == 6);
  }
}

TEST_CASE("a bot without consent changes nothing and every fix is refused") {
  const SimReport r = run_scenario(scenario("consent_refused.json"), game("river_of_flowers"), in_process());
  INFO(to_json(r).dump(2));
  CHECK(r.ok);
  const BotReport& b = bot(r, "shy");
  CHECK(b.location_accepted == 0);
  CHECK(b.consent_rejections == b.commands - 1);  // all but the login
  CHECK(r.last_seq == 1);                          // only the join was journaled
}

TEST_CASE("stuck and failing scripts are reported with their step") {
  const auto def = game("river_of_flowers");
  Scenario s;
  s.name = "stuck";
  s.stuck_ticks = 5;
  BotSpec b;
  b.player_id = "far";
  b.track = {mep::geo::GeoPoint(35.02, 135.77)};
  Action wrong;
  wrong.kind = Action::Kind::expect;
  wrong.predicate.kind = Predicate::Kind::inventory_count;
  wrong.predicate.item_kind = "flower";
  wrong.predicate.count = 3;
  Action talk;
  talk.kind = Action::Kind::talk;
  talk.npc_id = "riverkeeper";
  talk.choices = {0};
  b.script = {wrong, talk};
  s.bots = {b};
  const SimReport r = run_scenario(s, def, in_process());
  CHECK_FALSE(r.ok);
  REQUIRE(r.bots[0].assertions.size() == 1);
  CHECK_FALSE(r.bots[0].assertions[0].ok);
  CHECK(r.bots[0].assertions[0].step == 0);
  CHECK(r.bots[0].error == "SCRIPT_STUCK");
  CHECK(r.bots[0].error_step == 1);
  CHECK_FALSE(r.bots[0].finished);
}

TEST_CASE("HTTP and in-process runs agree") {
  const auto def = game("river_of_flowers");
  const auto s = scenario("river_of_flowers.json");
  const SimReport local = run_scenario(s, def, in_process());
  const SimReport http = run_scenario(s, def);
  CHECK(http.ok);
  CHECK(http.final_digest == local.final_digest);
  CHECK(report_digest(http) == report_digest(local));
  CHECK(http.wall_s < 5.0);
}

TEST_CASE("replay_check") {
  const auto def = game("kamo_rebus");
  const auto s = scenario("rebus_trio.json");
  SUBCASE("same seed twice") {
    const auto r = replay_check(s, def, in_process());
    CHECK_MESSAGE(r.ok, r.summary);
  }
  SUBCASE("another seed, seed-independent scenario") {
    SimOptions o = in_process();
    o.seed = 99;
    CHECK(replay_check(s, def, o).ok);
  }
  SUBCASE("perturbed tick order") {
    const auto r = replay_check(s, def, in_process(), true);
    CHECK_FALSE(r.ok);
    REQUIRE(r.first_divergent_seq);
    CHECK(*r.first_divergent_seq == 1);
    CHECK(r.summary.find("diverge at seq 1") != std::string::npos);
  }
}

TEST_CASE("percent encoding of item ids") {
  CHECK(percent_encode("/api/game/item/flower#3/collect") == "/api/game/item/flower%233/collect");
  CHECK(percent_encode("a b") == "a%20b");
}
