#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mep/engine/engine.hpp"

namespace mep::gamedef {

// Raw, structurally parsed game definition. Values are kept exactly as
// written (coordinates are plain doubles, not yet GeoPoints) so validate()
// can report every semantic defect with its source location.

// "document:line:column"
using SourcePath = std::string;

struct Coord {
  double lat = 0.0;
  double lon = 0.0;
};

struct ChoiceDef {
  std::string label;
  engine::EffectKind effect = engine::EffectKind::none;
  std::string quest_id;
  std::optional<std::string> next;
  SourcePath path;
};

struct NodeDef {
  std::string id;
  std::string text;
  std::vector<ChoiceDef> choices;
  SourcePath path;
};

struct DialogDef {
  std::string root;
  std::vector<NodeDef> nodes;
  SourcePath path;
};

struct NpcDef {
  std::string id;
  std::string name;
  Coord at;
  std::optional<double> radius_m;
  std::optional<DialogDef> dialog;
  SourcePath path;
};

// Either `count` instances at one coordinate, or one instance at each of
// `points`.
struct ItemPlacementDef {
  std::string kind;
  std::optional<Coord> at;
  long count = 1;
  std::vector<Coord> points;
  SourcePath path;
};

struct FragmentDef {
  long index = 0;
  std::string image_ref;
  std::string text_label;
  SourcePath path;
};

enum class QuestKindTag { reach, collect, rebus };

struct QuestDef {
  std::string id;
  std::string title;
  QuestKindTag kind = QuestKindTag::reach;
  // reach
  std::optional<Coord> target;
  double target_radius_m = 0.0;
  // collect
  std::string item_kind;
  long required_count = 0;
  std::string completion_npc;
  // rebus
  std::string solution;
  long min_players = 2;
  std::vector<FragmentDef> fragments;
  SourcePath path;
};

struct ParameterOverrides {
  std::optional<double> collect_radius_m;
  std::optional<double> npc_interaction_radius_m;
  std::optional<double> max_fix_age_s;
  std::optional<long> history_cap;
  std::optional<double> visibility_radius_m;
  SourcePath path;
};

struct GameDefinition {
  std::string game_id;
  std::string title;
  ParameterOverrides params;
  std::vector<NpcDef> npcs;
  std::vector<ItemPlacementDef> item_placements;
  std::vector<QuestDef> quests;
};

// Documents of one game, keyed by file name.
using DocumentSet = std::map<std::string, std::string>;

inline constexpr const char* kGameDoc = "game.xml";
inline constexpr const char* kNpcsDoc = "npcs.xml";
inline constexpr const char* kItemsDoc = "items.xml";
inline constexpr const char* kQuestsDoc = "quests.xml";

// Reads game.xml, npcs.xml, items.xml and quests.xml from `dir`; absent
// optional files are skipped.
DocumentSet load_game_dir(const std::filesystem::path& dir);

// Strict structural parse. Unknown elements or attributes, missing required
// attributes and malformed numbers are ParseErrors carrying document, line
// and column. Throws MissingDocument when game.xml is absent.
GameDefinition parse_game_xml(const DocumentSet& documents);

enum class IntegrityCode {
  E_DANGLING_REF,
  E_DUP_ID,
  E_BAD_COORD,
  E_EMPTY_SOLUTION,
  E_ZERO_COUNT,
  E_FRAGMENT_GAP,
  E_UNREACHABLE_NODE,
  E_BAD_RADIUS,
};

std::string_view to_string(IntegrityCode code);

struct IntegrityError {
  IntegrityCode code;
  SourcePath path;
  std::string message;
};

// Every semantic defect, in document order. Empty means instantiate() will
// succeed.
std::vector<IntegrityError> validate(const GameDefinition& def);

// Builds the initial world. Item instances are named "<kind>#<ordinal>" with
// ordinals counted per kind in document order. Throws InvalidDefinition when
// the definition does not validate.
engine::GameState build_state(const GameDefinition& def);
std::unique_ptr<engine::Engine> instantiate(const GameDefinition& def);

// Convenience: load, parse, validate (throwing InvalidDefinition with every
// integrity error in the details) in one step.
GameDefinition load_valid_definition(const std::filesystem::path& dir);

nlohmann::json to_json(const std::vector<IntegrityError>& errors);

}  // namespace mep::gamedef
