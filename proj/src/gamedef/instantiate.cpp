#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "mep/error.hpp"
#include "mep/gamedef/gamedef.hpp"

namespace mep::gamedef {

using namespace mep::engine;

namespace {

geo::GeoPoint point(const Coord& c) { return geo::GeoPoint(c.lat, c.lon); }

DialogTree dialog_of(const NpcDef& n) {
  DialogTree tree;
  if (!n.dialog) {
    // An NPC without a dialog still answers: one node, no choices.
    tree.root_node_id = "greeting";
    tree.nodes.emplace("greeting", DialogNode{n.name, {}});
    return tree;
  }
  tree.root_node_id = n.dialog->root;
  for (const auto& node : n.dialog->nodes) {
    DialogNode dn{node.text, {}};
    for (const auto& c : node.choices) {
      dn.choices.push_back(DialogChoice{c.label, Effect{c.effect, c.quest_id}, c.next});
    }
    tree.nodes.emplace(node.id, std::move(dn));
  }
  return tree;
}

QuestKind quest_kind_of(const QuestDef& q) {
  switch (q.kind) {
    case QuestKindTag::reach:
      return ReachTarget{point(*q.target), q.target_radius_m};
    case QuestKindTag::collect:
      return Collect{q.item_kind, static_cast<int>(q.required_count), q.completion_npc};
    case QuestKindTag::rebus: {
      Rebus r;
      for (const auto& f : q.fragments) {
        r.fragments.push_back({static_cast<int>(f.index), f.image_ref, f.text_label});
      }
      std::sort(r.fragments.begin(), r.fragments.end(),
                [](const auto& a, const auto& b) { return a.fragment_index < b.fragment_index; });
      r.solution_phrase = q.solution;
      r.min_players = static_cast<int>(q.min_players);
      return r;
    }
  }
  throw Error(ErrorCode::InvalidDefinition, "unknown quest kind");
}

}  // namespace

GameState build_state(const GameDefinition& def) {
  if (auto errors = validate(def); !errors.empty()) {
    throw Error(ErrorCode::InvalidDefinition,
                "game definition has " + std::to_string(errors.size()) + " integrity error(s)",
                {{"errors", to_json(errors)}});
  }

  GameState s;
  s.game_id = def.game_id;
  const auto& o = def.params;
  if (o.collect_radius_m) s.params.collect_radius_m = *o.collect_radius_m;
  if (o.npc_interaction_radius_m) s.params.npc_interaction_radius_m = *o.npc_interaction_radius_m;
  if (o.max_fix_age_s) s.params.max_fix_age_ms = std::llround(*o.max_fix_age_s * 1000.0);
  if (o.history_cap) s.params.history_cap = static_cast<std::size_t>(*o.history_cap);
  if (o.visibility_radius_m) s.params.visibility_radius_m = *o.visibility_radius_m;

  for (const auto& n : def.npcs) {
    s.npcs.emplace(n.id, Npc{n.id, n.name, point(n.at),
                             n.radius_m.value_or(s.params.npc_interaction_radius_m),
                             dialog_of(n)});
  }

  std::map<std::string, long> per_kind;
  for (const auto& p : def.item_placements) {
    long& ordinal = per_kind[p.kind];
    auto place = [&](const Coord& c) {
      const std::string id = p.kind + "#" + std::to_string(ordinal++);
      s.items.emplace(id, ItemInstance{id, p.kind, InWorld{point(c)}});
    };
    if (p.at) {
      for (long i = 0; i < p.count; ++i) place(*p.at);
    } else {
      for (const auto& c : p.points) place(c);
    }
  }

  for (const auto& q : def.quests) {
    s.quest_specs.emplace(q.id, QuestSpec{q.id, q.title, quest_kind_of(q)});
    if (q.kind == QuestKindTag::rebus) s.rebus_assignments[q.id];
  }
  return s;
}

std::unique_ptr<Engine> instantiate(const GameDefinition& def) {
  return std::make_unique<Engine>(build_state(def));
}

GameDefinition load_valid_definition(const std::filesystem::path& dir) {
  GameDefinition def = parse_game_xml(load_game_dir(dir));
  if (auto errors = validate(def); !errors.empty()) {
    throw Error(ErrorCode::InvalidDefinition,
                dir.string() + ": " + std::to_string(errors.size()) + " integrity error(s)",
                {{"errors", to_json(errors)}});
  }
  return def;
}

}  // namespace mep::gamedef
