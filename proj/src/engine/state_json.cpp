#include "mep/engine/serialize.hpp"
#include "mep/error.hpp"

namespace mep::engine {

using nlohmann::json;

namespace {

json point_json(const geo::GeoPoint& p) { return json{{"lat", p.lat_deg()}, {"lon", p.lon_deg()}}; }

geo::GeoPoint point_from(const json& j) {
  return geo::GeoPoint(j.at("lat").get<double>(), j.at("lon").get<double>());
}

QuestState parse_state(const std::string& s) {
  if (s == "offered") return QuestState::offered;
  if (s == "active") return QuestState::active;
  if (s == "completed") return QuestState::completed;
  throw Error(ErrorCode::CorruptRecord, "bad quest state: " + s);
}

json dialog_json(const DialogTree& d) {
  json nodes = json::object();
  for (const auto& [id, node] : d.nodes) {
    json choices = json::array();
    for (const auto& c : node.choices) {
      choices.push_back({{"label", c.label},
                         {"effect", to_string(c.effect.kind)},
                         {"quest", c.effect.quest_id},
                         {"next", c.next_node_id ? json(*c.next_node_id) : json(nullptr)}});
    }
    nodes[id] = {{"text", node.text}, {"choices", std::move(choices)}};
  }
  return json{{"root", d.root_node_id}, {"nodes", std::move(nodes)}};
}

DialogTree dialog_from(const json& j) {
  DialogTree d;
  d.root_node_id = j.at("root").get<std::string>();
  for (const auto& [id, jn] : j.at("nodes").items()) {
    DialogNode node;
    node.text = jn.at("text").get<std::string>();
    for (const auto& jc : jn.at("choices")) {
      DialogChoice c;
      c.label = jc.at("label").get<std::string>();
      const auto kind = parse_effect_kind(jc.at("effect").get<std::string>());
      if (!kind) throw Error(ErrorCode::CorruptRecord, "bad effect kind");
      c.effect = Effect{*kind, jc.at("quest").get<std::string>()};
      if (!jc.at("next").is_null()) c.next_node_id = jc.at("next").get<std::string>();
      node.choices.push_back(std::move(c));
    }
    d.nodes.emplace(id, std::move(node));
  }
  return d;
}

json quest_spec_json(const QuestSpec& q) {
  json j{{"quest_id", q.quest_id}, {"title", q.title}, {"kind", quest_kind_name(q.kind)}};
  if (const auto* r = std::get_if<ReachTarget>(&q.kind)) {
    j["target"] = point_json(r->target);
    j["radius_m"] = r->radius_m;
  } else if (const auto* c = std::get_if<Collect>(&q.kind)) {
    j["item_kind"] = c->item_kind;
    j["required_count"] = c->required_count;
    j["completion_npc_id"] = c->completion_npc_id;
  } else {
    const auto& rb = std::get<Rebus>(q.kind);
    json frags = json::array();
    for (const auto& f : rb.fragments) frags.push_back(to_json(f));
    j["fragments"] = std::move(frags);
    j["solution_phrase"] = rb.solution_phrase;
    j["min_players"] = rb.min_players;
  }
  return j;
}

QuestSpec quest_spec_from(const json& j) {
  QuestSpec q;
  q.quest_id = j.at("quest_id").get<std::string>();
  q.title = j.at("title").get<std::string>();
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "reach") {
    q.kind = ReachTarget{point_from(j.at("target")), j.at("radius_m").get<double>()};
  } else if (kind == "collect") {
    q.kind = Collect{j.at("item_kind").get<std::string>(), j.at("required_count").get<int>(),
                     j.at("completion_npc_id").get<std::string>()};
  } else if (kind == "rebus") {
    Rebus rb;
    for (const auto& jf : j.at("fragments")) {
      rb.fragments.push_back({jf.at("fragment_index").get<int>(),
                              jf.at("image_ref").get<std::string>(),
                              jf.at("text_label").get<std::string>()});
    }
    rb.solution_phrase = j.at("solution_phrase").get<std::string>();
    rb.min_players = j.at("min_players").get<int>();
    q.kind = std::move(rb);
  } else {
    throw Error(ErrorCode::CorruptRecord, "bad quest kind: " + kind);
  }
  return q;
}

QuestInstance quest_instance_from(const json& j) {
  QuestInstance q;
  q.quest_id = j.at("quest_id").get<std::string>();
  q.state = parse_state(j.at("state").get<std::string>());
  q.collected_count = j.at("collected_count").get<int>();
  if (!j.at("assigned_fragment_index").is_null()) {
    q.assigned_fragment_index = j.at("assigned_fragment_index").get<int>();
  }
  if (!j.at("completed_ms").is_null()) q.completed_ms = j.at("completed_ms").get<std::int64_t>();
  return q;
}

}  // namespace

json to_json(const RebusFragment& f) {
  return json{{"fragment_index", f.fragment_index},
              {"image_ref", f.image_ref},
              {"text_label", f.text_label}};
}

json to_json(const QuestInstance& q) {
  return json{{"quest_id", q.quest_id},
              {"state", to_string(q.state)},
              {"collected_count", q.collected_count},
              {"assigned_fragment_index",
               q.assigned_fragment_index ? json(*q.assigned_fragment_index) : json(nullptr)},
              {"completed_ms", q.completed_ms ? json(*q.completed_ms) : json(nullptr)}};
}

json to_json(const QuestEvent& e) {
  return json{{"player_id", e.player_id},
              {"quest_id", e.quest_id},
              {"state", to_string(e.state)},
              {"timestamp_ms", e.timestamp_ms}};
}

json to_json(const DialogView& v) {
  return json{{"npc_id", v.npc_id},
              {"node_id", v.node_id},
              {"text", v.text},
              {"choices", v.choice_labels}};
}

json to_json(const GameState& s) {
  json players = json::object();
  for (const auto& [id, p] : s.players) {
    json quests = json::object();
    for (const auto& [qid, q] : p.quests) quests[qid] = to_json(q);
    json viewed = json::array();
    for (const auto& [qid, idx] : p.rebus_fragments_viewed) viewed.push_back({qid, idx});
    players[id] = {{"display_name", p.display_name},
                   {"inventory", p.inventory},
                   {"quests", std::move(quests)},
                   {"rebus_fragments_viewed", std::move(viewed)},
                   {"dialog", p.dialog ? json{{"npc_id", p.dialog->npc_id},
                                              {"node_id", p.dialog->node_id}}
                                       : json(nullptr)}};
  }
  json npcs = json::object();
  for (const auto& [id, n] : s.npcs) {
    npcs[id] = {{"name", n.name},
                {"location", point_json(n.location)},
                {"interaction_radius_m", n.interaction_radius_m},
                {"dialog", dialog_json(n.dialog)}};
  }
  json items = json::object();
  for (const auto& [id, it] : s.items) {
    json holder;
    if (const auto* w = std::get_if<InWorld>(&it.holder)) {
      holder = {{"world", point_json(w->at)}};
    } else {
      holder = {{"player", std::get<HeldBy>(it.holder).player_id}};
    }
    items[id] = {{"kind", it.kind}, {"holder", std::move(holder)}};
  }
  json quests = json::object();
  for (const auto& [id, q] : s.quest_specs) quests[id] = quest_spec_json(q);
  json assignments = json::object();
  for (const auto& [qid, m] : s.rebus_assignments) {
    json a = json::object();
    for (const auto& [idx, pid] : m) a[std::to_string(idx)] = pid;
    assignments[qid] = std::move(a);
  }
  const Parameters& pr = s.params;
  return json{{"game_id", s.game_id},
              {"params",
               {{"collect_radius_m", pr.collect_radius_m},
                {"npc_interaction_radius_m", pr.npc_interaction_radius_m},
                {"max_fix_age_ms", pr.max_fix_age_ms},
                {"history_cap", pr.history_cap},
                {"visibility_radius_m", pr.visibility_radius_m}}},
              {"players", std::move(players)},
              {"npcs", std::move(npcs)},
              {"items", std::move(items)},
              {"quest_specs", std::move(quests)},
              {"rebus_assignments", std::move(assignments)},
              {"event_counter", s.event_counter}};
}

GameState game_state_from_json(const json& j) {
  GameState s;
  s.game_id = j.at("game_id").get<std::string>();
  const json& pr = j.at("params");
  s.params.collect_radius_m = pr.at("collect_radius_m").get<double>();
  s.params.npc_interaction_radius_m = pr.at("npc_interaction_radius_m").get<double>();
  s.params.max_fix_age_ms = pr.at("max_fix_age_ms").get<std::int64_t>();
  s.params.history_cap = pr.at("history_cap").get<std::size_t>();
  s.params.visibility_radius_m = pr.at("visibility_radius_m").get<double>();

  for (const auto& [id, jp] : j.at("players").items()) {
    Player p;
    p.player_id = id;
    p.display_name = jp.at("display_name").get<std::string>();
    for (const auto& i : jp.at("inventory")) p.inventory.insert(i.get<std::string>());
    for (const auto& [qid, jq] : jp.at("quests").items()) {
      p.quests.emplace(qid, quest_instance_from(jq));
    }
    for (const auto& v : jp.at("rebus_fragments_viewed")) {
      p.rebus_fragments_viewed.emplace(v.at(0).get<std::string>(), v.at(1).get<int>());
    }
    if (!jp.at("dialog").is_null()) {
      p.dialog = DialogPosition{jp.at("dialog").at("npc_id").get<std::string>(),
                                jp.at("dialog").at("node_id").get<std::string>()};
    }
    s.players.emplace(id, std::move(p));
  }
  for (const auto& [id, jn] : j.at("npcs").items()) {
    Npc n;
    n.npc_id = id;
    n.name = jn.at("name").get<std::string>();
    n.location = point_from(jn.at("location"));
    n.interaction_radius_m = jn.at("interaction_radius_m").get<double>();
    n.dialog = dialog_from(jn.at("dialog"));
    s.npcs.emplace(id, std::move(n));
  }
  for (const auto& [id, ji] : j.at("items").items()) {
    const json& h = ji.at("holder");
    Holder holder = h.contains("world") ? Holder{InWorld{point_from(h.at("world"))}}
                                        : Holder{HeldBy{h.at("player").get<std::string>()}};
    s.items.emplace(id, ItemInstance{id, ji.at("kind").get<std::string>(), std::move(holder)});
  }
  for (const auto& [id, jq] : j.at("quest_specs").items()) {
    s.quest_specs.emplace(id, quest_spec_from(jq));
  }
  for (const auto& [qid, ja] : j.at("rebus_assignments").items()) {
    auto& m = s.rebus_assignments[qid];
    for (const auto& [idx, pid] : ja.items()) m.emplace(std::stoi(idx), pid.get<std::string>());
  }
  s.event_counter = j.at("event_counter").get<std::uint64_t>();
  return s;
}

}  // namespace mep::engine
