#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "mep/geo/geo.hpp"

namespace mep::engine {

using PlayerId = std::string;
using NpcId = std::string;
using ItemId = std::string;
using QuestId = std::string;
using NodeId = std::string;

// ---------------------------------------------------------------------------
// Dialogs

enum class EffectKind { none, offer_quest, give_fragment, report_quest_status, complete_quest_check };

struct Effect {
  EffectKind kind = EffectKind::none;
  QuestId quest_id;  // empty for EffectKind::none

  friend bool operator==(const Effect&, const Effect&) = default;
};

struct DialogChoice {
  std::string label;
  Effect effect;
  std::optional<NodeId> next_node_id;  // none ends the dialog

  friend bool operator==(const DialogChoice&, const DialogChoice&) = default;
};

struct DialogNode {
  std::string text;
  std::vector<DialogChoice> choices;

  friend bool operator==(const DialogNode&, const DialogNode&) = default;
};

struct DialogTree {
  NodeId root_node_id;
  std::map<NodeId, DialogNode> nodes;

  friend bool operator==(const DialogTree&, const DialogTree&) = default;
};

// ---------------------------------------------------------------------------
// World entities

struct Npc {
  NpcId npc_id;
  std::string name;
  geo::GeoPoint location{0.0, 0.0};
  double interaction_radius_m = 100.0;  // 0 = reachable from anywhere
  DialogTree dialog;

  friend bool operator==(const Npc&, const Npc&) = default;
};

struct InWorld {
  geo::GeoPoint at{0.0, 0.0};
  friend bool operator==(const InWorld&, const InWorld&) = default;
};
struct HeldBy {
  PlayerId player_id;
  friend bool operator==(const HeldBy&, const HeldBy&) = default;
};
using Holder = std::variant<InWorld, HeldBy>;

struct ItemInstance {
  ItemId item_instance_id;
  std::string kind;
  Holder holder;

  friend bool operator==(const ItemInstance&, const ItemInstance&) = default;
};

// ---------------------------------------------------------------------------
// Quests

struct ReachTarget {
  geo::GeoPoint target{0.0, 0.0};
  double radius_m = 0.0;
  friend bool operator==(const ReachTarget&, const ReachTarget&) = default;
};

struct Collect {
  std::string item_kind;
  int required_count = 0;
  NpcId completion_npc_id;
  friend bool operator==(const Collect&, const Collect&) = default;
};

struct RebusFragment {
  int fragment_index = 0;
  std::string image_ref;
  std::string text_label;
  friend bool operator==(const RebusFragment&, const RebusFragment&) = default;
};

struct Rebus {
  std::vector<RebusFragment> fragments;  // ordered by fragment_index
  std::string solution_phrase;
  int min_players = 2;
  friend bool operator==(const Rebus&, const Rebus&) = default;
};

using QuestKind = std::variant<ReachTarget, Collect, Rebus>;

struct QuestSpec {
  QuestId quest_id;
  std::string title;
  QuestKind kind;

  friend bool operator==(const QuestSpec&, const QuestSpec&) = default;
};

enum class QuestState { offered, active, completed };

struct QuestInstance {
  QuestId quest_id;
  QuestState state = QuestState::offered;
  int collected_count = 0;                      // collect quests
  std::optional<int> assigned_fragment_index;   // rebus quests
  std::optional<std::int64_t> completed_ms;

  friend bool operator==(const QuestInstance&, const QuestInstance&) = default;
};

struct DialogPosition {
  NpcId npc_id;
  NodeId node_id;
  friend bool operator==(const DialogPosition&, const DialogPosition&) = default;
};

struct Player {
  PlayerId player_id;
  std::string display_name;
  std::set<ItemId> inventory;
  // offered, active and completed quests live in one map, so a quest can never
  // be both active and completed
  std::map<QuestId, QuestInstance> quests;
  std::set<std::pair<QuestId, int>> rebus_fragments_viewed;
  std::optional<DialogPosition> dialog;

  friend bool operator==(const Player&, const Player&) = default;
};

// Tunables; every field can be overridden per game definition.
struct Parameters {
  double collect_radius_m = 25.0;
  double npc_interaction_radius_m = 100.0;
  std::int64_t max_fix_age_ms = 60'000;
  std::size_t history_cap = 256;
  double visibility_radius_m = 250.0;

  friend bool operator==(const Parameters&, const Parameters&) = default;
};

// The single authoritative world, minus positions (those live in the tracker).
struct GameState {
  std::string game_id;
  Parameters params;
  std::map<PlayerId, Player> players;
  std::map<NpcId, Npc> npcs;
  std::map<ItemId, ItemInstance> items;
  std::map<QuestId, QuestSpec> quest_specs;
  std::map<QuestId, std::map<int, PlayerId>> rebus_assignments;
  std::uint64_t event_counter = 0;

  friend bool operator==(const GameState&, const GameState&) = default;
};

std::string_view to_string(EffectKind kind);
std::optional<EffectKind> parse_effect_kind(std::string_view s);
std::string_view to_string(QuestState state);
std::string_view quest_kind_name(const QuestKind& kind);

}  // namespace mep::engine
