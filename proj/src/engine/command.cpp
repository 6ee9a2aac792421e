#include "mep/engine/command.hpp"

#include <set>

#include "mep/engine/serialize.hpp"

namespace mep::engine {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

json opt_fix(const std::optional<LocationFix>& f) {
  return f ? tracker::to_json(*f) : json(nullptr);
}

std::optional<LocationFix> opt_fix_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return tracker::fix_from_json(j.at(key));
}

json events_json(const std::vector<QuestEvent>& events) {
  json out = json::array();
  for (const auto& e : events) out.push_back(to_json(e));
  return out;
}

void append(std::vector<QuestEvent>& into, std::vector<QuestEvent> more) {
  into.insert(into.end(), std::make_move_iterator(more.begin()),
              std::make_move_iterator(more.end()));
}

json inventory_json(const Engine& engine, const PlayerId& pid) {
  json inv = json::array();
  for (const auto& id : engine.player(pid).inventory) {
    inv.push_back({{"item_id", id}, {"kind", engine.state().items.at(id).kind}});
  }
  return inv;
}

}  // namespace

const PlayerId& acting_player(const Command& cmd) {
  return std::visit(overloaded{
                        [](const GiveItem& c) -> const PlayerId& { return c.from; },
                        [](const SubmitRebus& c) -> const PlayerId& { return c.submitter; },
                        [](const auto& c) -> const PlayerId& { return c.player_id; },
                    },
                    cmd);
}

json to_json(const Command& cmd) {
  return std::visit(
      overloaded{
          [](const JoinPlayer& c) {
            return json{{"type", "join_player"},
                        {"player_id", c.player_id},
                        {"display_name", c.display_name}};
          },
          [](const PushLocation& c) {
            return json{{"type", "push_location"},
                        {"player_id", c.player_id},
                        {"fix", tracker::to_json(c.fix)}};
          },
          [](const OpenDialog& c) {
            return json{{"type", "open_dialog"},
                        {"player_id", c.player_id},
                        {"npc_id", c.npc_id},
                        {"fix", opt_fix(c.fix)}};
          },
          [](const Choose& c) {
            return json{{"type", "choose"},
                        {"player_id", c.player_id},
                        {"npc_id", c.npc_id},
                        {"node_id", c.node_id},
                        {"choice_index", c.choice_index},
                        {"fix", opt_fix(c.fix)}};
          },
          [](const AcceptQuest& c) {
            return json{{"type", "accept_quest"},
                        {"player_id", c.player_id},
                        {"quest_id", c.quest_id},
                        {"fix", opt_fix(c.fix)}};
          },
          [](const CollectItem& c) {
            return json{{"type", "collect_item"},
                        {"player_id", c.player_id},
                        {"item_id", c.item_id},
                        {"fix", tracker::to_json(c.fix)}};
          },
          [](const DropItem& c) {
            return json{{"type", "drop_item"},
                        {"player_id", c.player_id},
                        {"item_id", c.item_id},
                        {"at", {{"lat", c.at.lat_deg()}, {"lon", c.at.lon_deg()}}},
                        {"fix", opt_fix(c.fix)}};
          },
          [](const GiveItem& c) {
            return json{{"type", "give_item"},
                        {"from", c.from},
                        {"to", c.to},
                        {"item_id", c.item_id},
                        {"fix", opt_fix(c.fix)}};
          },
          [](const SubmitRebus& c) {
            return json{{"type", "submit_rebus"},
                        {"submitter", c.submitter},
                        {"quest_id", c.quest_id},
                        {"participants", c.participants},
                        {"phrase", c.phrase},
                        {"fix", opt_fix(c.fix)}};
          },
      },
      cmd);
}

Command command_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  auto s = [&](const char* key) { return j.at(key).get<std::string>(); };
  if (type == "join_player") return JoinPlayer{s("player_id"), s("display_name")};
  if (type == "push_location") {
    return PushLocation{s("player_id"), tracker::fix_from_json(j.at("fix"))};
  }
  if (type == "open_dialog") return OpenDialog{s("player_id"), s("npc_id"), opt_fix_from(j, "fix")};
  if (type == "choose") {
    return Choose{s("player_id"), s("npc_id"), s("node_id"),
                  j.at("choice_index").get<std::size_t>(), opt_fix_from(j, "fix")};
  }
  if (type == "accept_quest") {
    return AcceptQuest{s("player_id"), s("quest_id"), opt_fix_from(j, "fix")};
  }
  if (type == "collect_item") {
    return CollectItem{s("player_id"), s("item_id"), tracker::fix_from_json(j.at("fix"))};
  }
  if (type == "drop_item") {
    const json& at = j.at("at");
    return DropItem{s("player_id"), s("item_id"),
                    geo::GeoPoint(at.at("lat").get<double>(), at.at("lon").get<double>()),
                    opt_fix_from(j, "fix")};
  }
  if (type == "give_item") {
    return GiveItem{s("from"), s("to"), s("item_id"), opt_fix_from(j, "fix")};
  }
  if (type == "submit_rebus") {
    return SubmitRebus{s("submitter"), s("quest_id"),
                       j.at("participants").get<std::vector<PlayerId>>(), s("phrase"),
                       opt_fix_from(j, "fix")};
  }
  throw Error(ErrorCode::CorruptRecord, "unknown command type: " + type);
}

json apply_command(Engine& engine, const Command& cmd, std::int64_t now_ms) {
  // rejected rebus answers are raised before the transaction starts
  if (const auto* c = std::get_if<SubmitRebus>(&cmd)) {
    std::vector<PlayerId> group = c->participants;
    group.push_back(c->submitter);
    const RebusVerdict v = engine.judge_rebus(c->quest_id, group, c->phrase);
    if (!v.accepted) {
      json details = json::object();
      if (!v.missing_fragments.empty()) details["missing"] = v.missing_fragments;
      throw Error(*v.reason, "rebus answer rejected: " + std::string(to_string(*v.reason)),
                  std::move(details));
    }
  }

  return engine.transact([&] {
    std::vector<QuestEvent> events;
    auto piggyback = [&](const PlayerId& pid, const std::optional<LocationFix>& fix) {
      if (fix) append(events, engine.push_location(pid, *fix, now_ms));
    };

    json body = std::visit(
        overloaded{
            [&](const JoinPlayer& c) {
              const Player& p = engine.join_player(c.player_id, c.display_name, now_ms);
              return json{{"player_id", p.player_id}, {"display_name", p.display_name}};
            },
            [&](const PushLocation& c) {
              piggyback(c.player_id, c.fix);
              return json{
                  {"entity", tracker::to_json(engine.tracker().get_state(c.player_id), false)}};
            },
            [&](const OpenDialog& c) {
              piggyback(c.player_id, c.fix);
              // without a piggybacked fix, the player's stored position stands in
              std::optional<LocationFix> fix = c.fix;
              if (!fix) {
                engine.player(c.player_id);
                fix = engine.tracker().get_state(c.player_id).last_fix;
              }
              return json{
                  {"node", to_json(engine.open_dialog(c.player_id, c.npc_id, fix, now_ms))}};
            },
            [&](const Choose& c) {
              piggyback(c.player_id, c.fix);
              ChoiceOutcome out =
                  engine.choose(c.player_id, c.npc_id, c.node_id, c.choice_index, now_ms);
              append(events, std::move(out.events));
              json effect{{"kind", to_string(out.effect.effect.kind)},
                          {"quest_id", out.effect.effect.quest_id},
                          {"completed_now", out.effect.completed_now}};
              if (out.effect.quest) effect["quest"] = to_json(*out.effect.quest);
              if (out.effect.fragment) effect["fragment"] = to_json(*out.effect.fragment);
              if (!out.effect.effect.quest_id.empty()) {
                const QuestSpec& spec = engine.quest_spec(out.effect.effect.quest_id);
                effect["quest_kind"] = quest_kind_name(spec.kind);
                if (const auto* col = std::get_if<Collect>(&spec.kind)) {
                  effect["required_count"] = col->required_count;
                }
              }
              return json{{"effect", std::move(effect)},
                          {"node", out.next ? to_json(*out.next) : json(nullptr)}};
            },
            [&](const AcceptQuest& c) {
              piggyback(c.player_id, c.fix);
              return json{{"quest", to_json(engine.accept_quest(c.player_id, c.quest_id, now_ms))}};
            },
            [&](const CollectItem& c) {
              piggyback(c.player_id, c.fix);
              CollectOutcome out = engine.collect_item(c.player_id, c.item_id, c.fix, now_ms);
              json progressed = json::array();
              for (const auto& q : out.progressed) progressed.push_back(to_json(q));
              return json{{"inventory", inventory_json(engine, c.player_id)},
                          {"progressed", std::move(progressed)}};
            },
            [&](const DropItem& c) {
              piggyback(c.player_id, c.fix);
              engine.drop_item(c.player_id, c.item_id, c.at, now_ms);
              return json{{"inventory", inventory_json(engine, c.player_id)}};
            },
            [&](const GiveItem& c) {
              piggyback(c.from, c.fix);
              engine.give_item(c.from, c.to, c.item_id, now_ms);
              return json{{"inventory", inventory_json(engine, c.from)}};
            },
            [&](const SubmitRebus& c) {
              piggyback(c.submitter, c.fix);
              std::vector<PlayerId> group = c.participants;
              group.push_back(c.submitter);
              RebusVerdict v = engine.submit_rebus(c.quest_id, group, c.phrase, now_ms);
              if (!v.accepted) {
                throw Error(*v.reason, "rebus answer rejected");
              }
              std::set<PlayerId> completed;
              for (const auto& e : v.events) completed.insert(e.player_id);
              append(events, std::move(v.events));
              return json{{"accepted", true}, {"completed_for", completed}};
            },
        },
        cmd);
    body["events"] = events_json(events);
    return body;
  });
}

}  // namespace mep::engine
