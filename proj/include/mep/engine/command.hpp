#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "mep/engine/engine.hpp"

namespace mep::engine {

// Serializable engine commands. Every mutation that reaches the engine from
// the outside goes through one of these, so a journal of them replays the
// world exactly. `fix` is a piggybacked position: it is stored and evaluated
// first, inside the same atomic command.

struct JoinPlayer {
  PlayerId player_id;
  std::string display_name;
};

struct PushLocation {
  PlayerId player_id;
  LocationFix fix;
};

// Without a fix, the player's last stored position is used.
struct OpenDialog {
  PlayerId player_id;
  NpcId npc_id;
  std::optional<LocationFix> fix;
};

struct Choose {
  PlayerId player_id;
  NpcId npc_id;
  NodeId node_id;
  std::size_t choice_index = 0;
  std::optional<LocationFix> fix;
};

struct AcceptQuest {
  PlayerId player_id;
  QuestId quest_id;
  std::optional<LocationFix> fix;
};

struct CollectItem {
  PlayerId player_id;
  ItemId item_id;
  LocationFix fix;
};

struct DropItem {
  PlayerId player_id;
  ItemId item_id;
  geo::GeoPoint at;
  std::optional<LocationFix> fix;
};

struct GiveItem {
  PlayerId from;
  PlayerId to;
  ItemId item_id;
  std::optional<LocationFix> fix;
};

struct SubmitRebus {
  PlayerId submitter;
  QuestId quest_id;
  std::vector<PlayerId> participants;
  std::string phrase;
  std::optional<LocationFix> fix;
};

using Command = std::variant<JoinPlayer, PushLocation, OpenDialog, Choose, AcceptQuest,
                             CollectItem, DropItem, GiveItem, SubmitRebus>;

nlohmann::json to_json(const Command& cmd);
Command command_from_json(const nlohmann::json& j);

// The player a command acts for (the giver for GiveItem).
const PlayerId& acting_player(const Command& cmd);

// Applies one command atomically and returns its JSON result body. A rejected
// rebus answer is raised as mep::Error with the rejection reason, so failed
// commands never change state and are never journaled.
nlohmann::json apply_command(Engine& engine, const Command& cmd, std::int64_t now_ms);

}  // namespace mep::engine
