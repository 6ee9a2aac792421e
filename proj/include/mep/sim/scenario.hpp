#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mep/gamedef/gamedef.hpp"
#include "mep/geo/geo.hpp"

namespace mep::sim {

inline constexpr double kWalkMps = 1.4;
inline constexpr double kCycleMps = 4.5;

// walk_to_distance target meaning "the end of the track".
inline constexpr double kTrackEnd = std::numeric_limits<double>::infinity();

// A condition on the bot's own state as the server reports it.
struct Predicate {
  enum class Kind { quest_state, inventory_count, has_fragment, consent_rejections_at_least };
  Kind kind = Kind::quest_state;
  std::string quest_id;
  std::string state;        // quest_state: offered | active | completed | none
  std::string item_kind;    // inventory_count; "*" for any
  long count = 0;           // inventory_count, consent_rejections_at_least
};

struct Action {
  enum class Kind { walk_to_distance, talk, accept, collect_nearest, submit_rebus, expect, wait, wait_for };
  Kind kind = Kind::wait;
  double distance_m = 0.0;              // walk_to_distance
  std::string collect_kind;             // walk_to_distance: pick these up on the way
  std::string npc_id;                   // talk
  std::vector<std::size_t> choices;     // talk: one choice per node, from the root
  std::string quest_id;                 // accept, submit_rebus
  std::string item_kind;                // collect_nearest
  std::string phrase;                   // submit_rebus
  std::vector<std::string> participants;
  std::string expect_outcome = "accepted";  // submit_rebus: "accepted" or an error code
  Predicate predicate;                  // expect, wait_for
  long ticks = 0;                       // wait
};

struct BotSpec {
  std::string player_id;
  std::string display_name;
  std::vector<geo::GeoPoint> track;  // one point: stationary
  double speed_mps = kWalkMps;
  double tick_s = 1.0;
  bool consent = true;
  std::vector<Action> script;
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 1;
  std::int64_t start_ms = 1'242'000'000'000;  // June 2009
  long stuck_ticks = 600;
  long max_rounds = 200'000;
  std::vector<BotSpec> bots;
};

// JSON and XML forms carry the same content; see docs/scenarios.md.
Scenario scenario_from_json(const nlohmann::json& j);
Scenario scenario_from_xml(const std::string& text, const std::string& document_name);
Scenario load_scenario(const std::filesystem::path& path);

// Checks that speeds and ticks are positive, tracks usable, and every NPC,
// quest, item kind and participant exists. Throws InvalidArgument.
void check_scenario(const Scenario& s, const gamedef::GameDefinition& def);

}  // namespace mep::sim
