#include "mep/engine/engine.hpp"

#include <algorithm>
#include <set>

#include "mep/engine/phrase.hpp"

namespace mep::engine {

std::string_view to_string(EffectKind kind) {
  switch (kind) {
    case EffectKind::none: return "none";
    case EffectKind::offer_quest: return "offer_quest";
    case EffectKind::give_fragment: return "give_fragment";
    case EffectKind::report_quest_status: return "report_quest_status";
    case EffectKind::complete_quest_check: return "complete_quest_check";
  }
  return "none";
}

std::optional<EffectKind> parse_effect_kind(std::string_view s) {
  for (auto k : {EffectKind::none, EffectKind::offer_quest, EffectKind::give_fragment,
                 EffectKind::report_quest_status, EffectKind::complete_quest_check}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::string_view to_string(QuestState state) {
  switch (state) {
    case QuestState::offered: return "offered";
    case QuestState::active: return "active";
    case QuestState::completed: return "completed";
  }
  return "offered";
}

std::string_view quest_kind_name(const QuestKind& kind) {
  if (std::holds_alternative<ReachTarget>(kind)) return "reach";
  if (std::holds_alternative<Collect>(kind)) return "collect";
  return "rebus";
}

namespace {

LocationFix placement_fix(const geo::GeoPoint& at, std::int64_t ts) {
  return LocationFix{at, ts, true, tracker::FixSource::simulator};
}

}  // namespace

Engine::Engine(GameState state)
    : state_(std::move(state)),
      tracker_(std::make_unique<tracker::Tracker>(state_.params.history_cap)) {
  for (const auto& [id, n] : state_.npcs) {
    tracker_->register_entity(id, tracker::EntityKind::npc,
                              placement_fix(n.location, kPlacementTimestampMs));
  }
  for (const auto& [id, item] : state_.items) {
    if (const auto* w = std::get_if<InWorld>(&item.holder)) {
      tracker_->register_entity(id, tracker::EntityKind::item,
                                placement_fix(w->at, kPlacementTimestampMs));
    } else {
      tracker_->register_entity(id, tracker::EntityKind::item);
    }
  }
  for (const auto& [id, p] : state_.players) {
    tracker_->register_entity(id, tracker::EntityKind::player);
  }
}

Engine::Engine(GameState state, std::shared_ptr<const tracker::Snapshot> positions)
    : state_(std::move(state)),
      tracker_(std::make_unique<tracker::Tracker>(positions->history_cap())) {
  tracker_->restore(std::move(positions));
}

void Engine::rollback(Checkpoint cp) {
  state_ = std::move(cp.state);
  tracker_->restore(std::move(cp.positions));
}

// ---------------------------------------------------------------------------
// lookups

const Player& Engine::player(const PlayerId& id) const {
  const auto it = state_.players.find(id);
  if (it == state_.players.end()) throw Error(ErrorCode::UnknownPlayer, "unknown player: " + id);
  return it->second;
}

Player& Engine::player_mut(const PlayerId& id) {
  const auto it = state_.players.find(id);
  if (it == state_.players.end()) throw Error(ErrorCode::UnknownPlayer, "unknown player: " + id);
  return it->second;
}

const Npc& Engine::npc(const NpcId& id) const {
  const auto it = state_.npcs.find(id);
  if (it == state_.npcs.end()) throw Error(ErrorCode::UnknownNpc, "unknown npc: " + id);
  return it->second;
}

ItemInstance& Engine::item_mut(const ItemId& id) {
  const auto it = state_.items.find(id);
  if (it == state_.items.end()) throw Error(ErrorCode::UnknownItem, "unknown item: " + id);
  return it->second;
}

const QuestSpec& Engine::quest_spec(const QuestId& id) const {
  const auto it = state_.quest_specs.find(id);
  if (it == state_.quest_specs.end()) throw Error(ErrorCode::UnknownQuest, "unknown quest: " + id);
  return it->second;
}

void Engine::require_fresh(const LocationFix& fix, std::int64_t now_ms) const {
  if (now_ms - fix.timestamp_ms > state_.params.max_fix_age_ms) {
    throw Error(ErrorCode::StaleFix, "location fix is " + std::to_string(now_ms - fix.timestamp_ms) +
                                         " ms old (limit " +
                                         std::to_string(state_.params.max_fix_age_ms) + ")");
  }
}

// ---------------------------------------------------------------------------
// players and movement

const Player& Engine::join_player(const PlayerId& player_id, const std::string& display_name,
                                  std::int64_t /*now_ms*/) {
  if (player_id.empty()) throw Error(ErrorCode::InvalidArgument, "player id must not be empty");
  if (state_.players.contains(player_id) || tracker_->snapshot()->find(player_id)) {
    throw Error(ErrorCode::DuplicatePlayer, "player id already in use: " + player_id);
  }
  return transact([&]() -> const Player& {
    tracker_->register_entity(player_id, tracker::EntityKind::player);
    Player p;
    p.player_id = player_id;
    p.display_name = display_name;
    return state_.players.emplace(player_id, std::move(p)).first->second;
  });
}

std::vector<QuestEvent> Engine::push_location(const PlayerId& player_id, const LocationFix& fix,
                                              std::int64_t now_ms) {
  player(player_id);
  return transact([&] {
    tracker_->update_location(player_id, fix);
    return on_location_update(player_id, fix, now_ms);
  });
}

std::vector<QuestEvent> Engine::on_location_update(const PlayerId& player_id,
                                                   const LocationFix& fix, std::int64_t now_ms) {
  std::vector<QuestEvent> events;
  if (now_ms - fix.timestamp_ms > state_.params.max_fix_age_ms) return events;
  Player& p = player_mut(player_id);
  for (auto& [qid, inst] : p.quests) {
    if (inst.state != QuestState::active) continue;
    const auto* reach = std::get_if<ReachTarget>(&quest_spec(qid).kind);
    if (!reach) continue;
    if (geo::within_radius(reach->target, fix.point, reach->radius_m)) {
      inst.state = QuestState::completed;
      inst.completed_ms = now_ms;
      events.push_back({player_id, qid, QuestState::completed, now_ms});
    }
  }
  return events;
}

// ---------------------------------------------------------------------------
// dialogs

DialogView Engine::view_of(const Npc& n, const NodeId& node_id) const {
  const DialogNode& node = n.dialog.nodes.at(node_id);
  DialogView v{n.npc_id, node_id, node.text, {}};
  for (const auto& c : node.choices) v.choice_labels.push_back(c.label);
  return v;
}

DialogView Engine::open_dialog(const PlayerId& player_id, const NpcId& npc_id,
                               const std::optional<LocationFix>& player_fix,
                               std::int64_t now_ms) {
  player(player_id);
  const Npc& n = npc(npc_id);
  if (n.interaction_radius_m > 0.0) {
    if (!player_fix) {
      throw Error(ErrorCode::OutOfRange, "npc " + npc_id + " requires a location fix");
    }
    require_fresh(*player_fix, now_ms);
    const double d = geo::haversine_distance(n.location, player_fix->point);
    if (d > n.interaction_radius_m) {
      throw Error(ErrorCode::OutOfRange,
                  "npc " + npc_id + " is " + std::to_string(d) + " m away (limit " +
                      std::to_string(n.interaction_radius_m) + " m)",
                  {{"distance_m", d}, {"limit_m", n.interaction_radius_m}});
    }
  }
  return transact([&] {
    player_mut(player_id).dialog = DialogPosition{npc_id, n.dialog.root_node_id};
    return view_of(n, n.dialog.root_node_id);
  });
}

EffectResult Engine::apply_effect(Player& p, const Npc& n, const Effect& effect,
                                  std::int64_t now_ms, std::vector<QuestEvent>& events) {
  EffectResult r{effect, std::nullopt, std::nullopt, false};
  if (effect.kind == EffectKind::none) return r;

  const QuestSpec& spec = quest_spec(effect.quest_id);
  auto inst_it = p.quests.find(effect.quest_id);

  switch (effect.kind) {
    case EffectKind::none:
      break;

    case EffectKind::offer_quest: {
      if (inst_it != p.quests.end() && inst_it->second.state == QuestState::completed) {
        throw Error(ErrorCode::QuestAlreadyCompleted, "quest already completed: " + spec.quest_id);
      }
      if (inst_it == p.quests.end()) {
        QuestInstance fresh;
        fresh.quest_id = spec.quest_id;
        inst_it = p.quests.emplace(spec.quest_id, std::move(fresh)).first;
      }
      r.quest = inst_it->second;
      break;
    }

    case EffectKind::give_fragment: {
      const auto* rebus = std::get_if<Rebus>(&spec.kind);
      if (!rebus) throw Error(ErrorCode::NotRebus, "quest is not a rebus: " + spec.quest_id);
      if (inst_it == p.quests.end()) {
        throw Error(ErrorCode::NotOffered, "quest not offered to player: " + spec.quest_id);
      }
      QuestInstance& inst = inst_it->second;
      if (inst.state == QuestState::completed) {
        throw Error(ErrorCode::QuestAlreadyCompleted, "quest already completed: " + spec.quest_id);
      }
      if (!inst.assigned_fragment_index) {
        auto& assigned = state_.rebus_assignments[spec.quest_id];
        std::optional<int> next;
        for (const auto& f : rebus->fragments) {
          if (!assigned.contains(f.fragment_index)) {
            next = f.fragment_index;
            break;
          }
        }
        if (!next) {
          throw Error(ErrorCode::NoFragmentsLeft,
                      "all fragments of " + spec.quest_id + " are assigned");
        }
        assigned.emplace(*next, p.player_id);
        inst.assigned_fragment_index = next;
      }
      p.rebus_fragments_viewed.emplace(spec.quest_id, *inst.assigned_fragment_index);
      r.fragment = rebus->fragments.at(static_cast<std::size_t>(*inst.assigned_fragment_index));
      r.quest = inst;
      break;
    }

    case EffectKind::report_quest_status: {
      if (inst_it != p.quests.end()) r.quest = inst_it->second;
      break;
    }

    case EffectKind::complete_quest_check: {
      if (inst_it == p.quests.end()) break;
      QuestInstance& inst = inst_it->second;
      const auto* collect = std::get_if<Collect>(&spec.kind);
      if (collect && inst.state == QuestState::active && collect->completion_npc_id == n.npc_id &&
          inst.collected_count >= collect->required_count) {
        inst.state = QuestState::completed;
        inst.completed_ms = now_ms;
        r.completed_now = true;
        events.push_back({p.player_id, spec.quest_id, QuestState::completed, now_ms});
      }
      r.quest = inst;
      break;
    }
  }
  return r;
}

ChoiceOutcome Engine::choose(const PlayerId& player_id, const NpcId& npc_id,
                             const NodeId& node_id, std::size_t choice_index,
                             std::int64_t now_ms) {
  const Npc& n = npc(npc_id);
  const Player& p = player(player_id);
  if (!p.dialog || p.dialog->npc_id != npc_id || p.dialog->node_id != node_id) {
    throw Error(ErrorCode::WrongNode, "player " + player_id + " is not at node " + node_id +
                                          " of " + npc_id);
  }
  const DialogNode& node = n.dialog.nodes.at(node_id);
  if (choice_index >= node.choices.size()) {
    throw Error(ErrorCode::BadChoice, "node " + node_id + " has " +
                                          std::to_string(node.choices.size()) + " choices");
  }
  const DialogChoice& choice = node.choices[choice_index];

  return transact([&] {
    ChoiceOutcome out;
    Player& pm = player_mut(player_id);
    out.effect = apply_effect(pm, n, choice.effect, now_ms, out.events);
    if (choice.next_node_id) {
      pm.dialog = DialogPosition{npc_id, *choice.next_node_id};
      out.next = view_of(n, *choice.next_node_id);
    } else {
      pm.dialog.reset();
    }
    return out;
  });
}

QuestInstance Engine::accept_quest(const PlayerId& player_id, const QuestId& quest_id,
                                   std::int64_t /*now_ms*/) {
  const Player& p = player(player_id);
  quest_spec(quest_id);
  const auto it = p.quests.find(quest_id);
  if (it == p.quests.end()) {
    throw Error(ErrorCode::NotOffered, "quest " + quest_id + " was not offered to " + player_id);
  }
  if (it->second.state == QuestState::active) {
    throw Error(ErrorCode::AlreadyActive, "quest already active: " + quest_id);
  }
  if (it->second.state == QuestState::completed) {
    throw Error(ErrorCode::AlreadyCompleted, "quest already completed: " + quest_id);
  }
  return transact([&] {
    QuestInstance& inst = player_mut(player_id).quests.at(quest_id);
    inst.state = QuestState::active;
    return inst;
  });
}

// ---------------------------------------------------------------------------
// items

CollectOutcome Engine::collect_item(const PlayerId& player_id, const ItemId& item_id,
                                    const LocationFix& player_fix, std::int64_t now_ms) {
  player(player_id);
  const ItemInstance& item = item_mut(item_id);
  const auto* w = std::get_if<InWorld>(&item.holder);
  if (!w) throw Error(ErrorCode::NotInWorld, "item is not lying in the world: " + item_id);
  require_fresh(player_fix, now_ms);
  const double d = geo::haversine_distance(w->at, player_fix.point);
  if (d > state_.params.collect_radius_m) {
    throw Error(ErrorCode::OutOfRange,
                "item " + item_id + " is " + std::to_string(d) + " m away (limit " +
                    std::to_string(state_.params.collect_radius_m) + " m)",
                {{"distance_m", d}, {"limit_m", state_.params.collect_radius_m}});
  }

  return transact([&] {
    ItemInstance& it = item_mut(item_id);
    Player& p = player_mut(player_id);
    it.holder = HeldBy{player_id};
    p.inventory.insert(item_id);
    tracker_->detach(item_id);

    CollectOutcome out;
    for (auto& [qid, inst] : p.quests) {
      if (inst.state != QuestState::active) continue;
      const auto* c = std::get_if<Collect>(&quest_spec(qid).kind);
      if (!c || c->item_kind != it.kind) continue;
      if (inst.collected_count < c->required_count) {
        ++inst.collected_count;
        out.progressed.push_back(inst);
      }
    }
    out.inventory.assign(p.inventory.begin(), p.inventory.end());
    return out;
  });
}

void Engine::drop_item(const PlayerId& player_id, const ItemId& item_id, const geo::GeoPoint& at,
                       std::int64_t now_ms) {
  player(player_id);
  const ItemInstance& item = item_mut(item_id);
  const auto* h = std::get_if<HeldBy>(&item.holder);
  if (!h || h->player_id != player_id) {
    throw Error(ErrorCode::NotHeld, player_id + " does not hold " + item_id);
  }
  transact([&] {
    item_mut(item_id).holder = InWorld{at};
    player_mut(player_id).inventory.erase(item_id);
    tracker_->update_location(item_id, placement_fix(at, now_ms));
  });
}

void Engine::give_item(const PlayerId& from, const PlayerId& to, const ItemId& item_id,
                       std::int64_t /*now_ms*/) {
  player(from);
  player(to);
  const ItemInstance& item = item_mut(item_id);
  const auto* h = std::get_if<HeldBy>(&item.holder);
  if (!h || h->player_id != from) {
    throw Error(ErrorCode::NotHeld, from + " does not hold " + item_id);
  }
  transact([&] {
    if (from == to) return;
    item_mut(item_id).holder = HeldBy{to};
    player_mut(from).inventory.erase(item_id);
    player_mut(to).inventory.insert(item_id);
  });
}

// ---------------------------------------------------------------------------
// rebus

RebusVerdict Engine::judge_rebus(const QuestId& quest_id,
                                 const std::vector<PlayerId>& participants,
                                 const std::string& phrase) const {
  const QuestSpec& spec = quest_spec(quest_id);
  const auto* rebus = std::get_if<Rebus>(&spec.kind);
  if (!rebus) throw Error(ErrorCode::NotRebus, "quest is not a rebus: " + quest_id);

  const std::set<PlayerId> group(participants.begin(), participants.end());
  RebusVerdict v;
  for (const auto& pid : group) {
    const Player& p = player(pid);
    const auto it = p.quests.find(quest_id);
    if (it == p.quests.end() || it->second.state != QuestState::active) {
      v.reason = ErrorCode::QuestInactive;
      return v;
    }
  }

  std::set<int> seen;
  for (const auto& pid : group) {
    for (const auto& [qid, idx] : player(pid).rebus_fragments_viewed) {
      if (qid == quest_id) seen.insert(idx);
    }
  }
  for (const auto& f : rebus->fragments) {
    if (!seen.contains(f.fragment_index)) v.missing_fragments.push_back(f.fragment_index);
  }
  if (!v.missing_fragments.empty()) {
    v.reason = ErrorCode::IncompleteCoverage;
    return v;
  }
  if (static_cast<int>(group.size()) < rebus->min_players) {
    v.reason = ErrorCode::TooFewPlayers;
    return v;
  }
  // the phrase is checked last so a lone player learns nothing about it
  if (normalize_phrase(phrase) != normalize_phrase(rebus->solution_phrase)) {
    v.reason = ErrorCode::WrongPhrase;
    return v;
  }
  v.accepted = true;
  return v;
}

RebusVerdict Engine::submit_rebus(const QuestId& quest_id,
                                  const std::vector<PlayerId>& participants,
                                  const std::string& phrase, std::int64_t now_ms) {
  RebusVerdict v = judge_rebus(quest_id, participants, phrase);
  if (!v.accepted) return v;
  const std::set<PlayerId> group(participants.begin(), participants.end());
  transact([&] {
    for (const auto& pid : group) {
      QuestInstance& inst = player_mut(pid).quests.at(quest_id);
      inst.state = QuestState::completed;
      inst.completed_ms = now_ms;
      v.events.push_back({pid, quest_id, QuestState::completed, now_ms});
    }
  });
  return v;
}

}  // namespace mep::engine
