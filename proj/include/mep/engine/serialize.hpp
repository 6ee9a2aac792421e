#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "mep/engine/engine.hpp"
#include "mep/engine/types.hpp"

namespace mep::engine {

// Canonical JSON for the game state. Object keys are sorted, numbers print
// in shortest round-trip form, so equal states serialize to equal bytes.
nlohmann::json to_json(const GameState& state);
GameState game_state_from_json(const nlohmann::json& j);

nlohmann::json to_json(const QuestInstance& q);
nlohmann::json to_json(const QuestEvent& e);
nlohmann::json to_json(const DialogView& v);
nlohmann::json to_json(const RebusFragment& f);

std::string sha256_hex(std::string_view bytes);

// Hash of the game state plus every entity's latest position; cheap enough to
// record after every command.
std::string state_digest(const Engine& engine);

// Hash of the game state plus the full tracker contents including history.
std::string full_digest(const Engine& engine);

}  // namespace mep::engine
