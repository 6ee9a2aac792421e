#pragma once

#include "mep/engine/engine.hpp"

namespace mep::testing {

// Small hand-built world shared by the engine tests and the fuzzer.
//
//   giver     (35.0, 135.0), radius 100: offers "flowers", hands out "rb3"
//             fragments, reports and checks "flowers"
//   oracle    radius 0 (talk from anywhere): offers "rb3", "rb2" and "bridge",
//             hands out "rb2" fragments
//   flower#0..#3 north of the giver, stone#0 next to it
inline engine::GameState fixture_state() {
  using namespace engine;
  GameState s;
  s.game_id = "fixture";

  Npc giver;
  giver.npc_id = "giver";
  giver.name = "Giver";
  giver.location = geo::GeoPoint(35.0, 135.0);
  giver.interaction_radius_m = 100.0;
  giver.dialog.root_node_id = "start";
  giver.dialog.nodes["start"] = DialogNode{
      "Hello.",
      {
          {"Flowers?", {EffectKind::offer_quest, "flowers"}, NodeId("offered")},
          {"Picture?", {EffectKind::give_fragment, "rb3"}, std::nullopt},
          {"How am I doing?", {EffectKind::report_quest_status, "flowers"}, std::nullopt},
          {"I have them", {EffectKind::complete_quest_check, "flowers"}, std::nullopt},
          {"Bye", {}, std::nullopt},
      }};
  giver.dialog.nodes["offered"] =
      DialogNode{"Bring me two flowers.", {{"Back", {}, NodeId("start")}}};
  s.npcs.emplace(giver.npc_id, giver);

  Npc oracle;
  oracle.npc_id = "oracle";
  oracle.name = "Oracle";
  oracle.location = geo::GeoPoint(35.05, 135.05);
  oracle.interaction_radius_m = 0.0;
  oracle.dialog.root_node_id = "root";
  oracle.dialog.nodes["root"] = DialogNode{
      "Riddles.",
      {
          {"Three pictures", {EffectKind::offer_quest, "rb3"}, std::nullopt},
          {"Two pictures", {EffectKind::offer_quest, "rb2"}, std::nullopt},
          {"Show me", {EffectKind::give_fragment, "rb2"}, std::nullopt},
          {"The bridge", {EffectKind::offer_quest, "bridge"}, std::nullopt},
      }};
  s.npcs.emplace(oracle.npc_id, oracle);

  for (int i = 0; i < 4; ++i) {
    const std::string id = "flower#" + std::to_string(i);
    s.items.emplace(id, ItemInstance{id, "flower", InWorld{geo::GeoPoint(35.0 + 0.0005 * (i + 1), 135.0)}});
  }
  s.items.emplace("stone#0", ItemInstance{"stone#0", "stone", InWorld{geo::GeoPoint(35.0, 135.0001)}});

  s.quest_specs.emplace("flowers", QuestSpec{"flowers", "Flowers", Collect{"flower", 2, "giver"}});
  Rebus rb3;
  rb3.fragments = {{0, "img/kamo.png", "kamo"}, {1, "img/river.png", "river"}, {2, "img/bank.png", "bank"}};
  rb3.solution_phrase = "Kamo River Bank";
  rb3.min_players = 2;
  s.quest_specs.emplace("rb3", QuestSpec{"rb3", "Three pictures", rb3});
  Rebus rb2;
  rb2.fragments = {{0, "img/a.png", "a"}, {1, "img/b.png", "b"}};
  rb2.solution_phrase = "Demachi";
  rb2.min_players = 2;
  s.quest_specs.emplace("rb2", QuestSpec{"rb2", "Two pictures", rb2});
  s.quest_specs.emplace("bridge",
                        QuestSpec{"bridge", "The bridge", ReachTarget{geo::GeoPoint(35.01, 135.0), 50.0}});
  return s;
}

inline tracker::LocationFix fix_at(double lat, double lon, std::int64_t ts) {
  return tracker::LocationFix{geo::GeoPoint(lat, lon), ts, true, tracker::FixSource::client_request};
}

}  // namespace mep::testing
