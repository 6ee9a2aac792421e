#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "mep/engine/types.hpp"
#include "mep/error.hpp"
#include "mep/tracker/tracker.hpp"

namespace mep::engine {

using tracker::LocationFix;

// Placement timestamp for virtual entities registered at instantiation.
inline constexpr std::int64_t kPlacementTimestampMs = 1;

struct DialogView {
  NpcId npc_id;
  NodeId node_id;
  std::string text;
  std::vector<std::string> choice_labels;
};

struct QuestEvent {
  PlayerId player_id;
  QuestId quest_id;
  QuestState state;
  std::int64_t timestamp_ms;

  friend bool operator==(const QuestEvent&, const QuestEvent&) = default;
};

struct EffectResult {
  Effect effect;
  std::optional<QuestInstance> quest;      // player's instance after the effect
  std::optional<RebusFragment> fragment;   // give_fragment
  bool completed_now = false;              // complete_quest_check
};

struct ChoiceOutcome {
  EffectResult effect;
  std::optional<DialogView> next;  // none when the dialog ended
  std::vector<QuestEvent> events;
};

struct CollectOutcome {
  std::vector<ItemId> inventory;
  std::vector<QuestInstance> progressed;  // collect quests whose count moved
};

struct RebusVerdict {
  bool accepted = false;
  std::optional<ErrorCode> reason;    // WrongPhrase, IncompleteCoverage, TooFewPlayers, QuestInactive
  std::vector<int> missing_fragments; // IncompleteCoverage only
  std::vector<QuestEvent> events;
};

// Game server core. Every mutating operation is atomic: it either fully
// applies (and bumps the event counter once) or throws mep::Error with the
// world exactly as it was.
//
// Single writer: callers serialize mutations. The tracker inside may be read
// concurrently through its snapshots.
class Engine {
 public:
  // Registers every NPC and world item of `state` in a fresh tracker, and
  // every player without a position.
  explicit Engine(GameState state);
  // Resumes from persisted parts; the tracker snapshot must match `state`.
  Engine(GameState state, std::shared_ptr<const tracker::Snapshot> positions);

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  const GameState& state() const noexcept { return state_; }
  const tracker::Tracker& tracker() const noexcept { return *tracker_; }
  const Parameters& params() const noexcept { return state_.params; }

  const Player& join_player(const PlayerId& player_id, const std::string& display_name,
                            std::int64_t now_ms);

  // Stores a consenting fix in the tracker, then evaluates reach-target quests
  // against it. This is the only way quests react to movement.
  std::vector<QuestEvent> push_location(const PlayerId& player_id, const LocationFix& fix,
                                        std::int64_t now_ms);

  // Completes every active reach-target quest whose target contains the fix.
  // A stale fix completes nothing.
  std::vector<QuestEvent> on_location_update(const PlayerId& player_id, const LocationFix& fix,
                                             std::int64_t now_ms);

  DialogView open_dialog(const PlayerId& player_id, const NpcId& npc_id,
                         const std::optional<LocationFix>& player_fix, std::int64_t now_ms);

  ChoiceOutcome choose(const PlayerId& player_id, const NpcId& npc_id, const NodeId& node_id,
                       std::size_t choice_index, std::int64_t now_ms);

  QuestInstance accept_quest(const PlayerId& player_id, const QuestId& quest_id,
                             std::int64_t now_ms);

  CollectOutcome collect_item(const PlayerId& player_id, const ItemId& item_id,
                              const LocationFix& player_fix, std::int64_t now_ms);

  // Dropping never lowers collect-quest progress.
  void drop_item(const PlayerId& player_id, const ItemId& item_id, const geo::GeoPoint& at,
                 std::int64_t now_ms);

  // No proximity requirement between giver and receiver.
  void give_item(const PlayerId& from, const PlayerId& to, const ItemId& item_id,
                 std::int64_t now_ms);

  // Location plays no part in the verdict. Rejections leave state untouched.
  RebusVerdict submit_rebus(const QuestId& quest_id, const std::vector<PlayerId>& participants,
                            const std::string& phrase, std::int64_t now_ms);

  // Pure check of the three acceptance conditions.
  RebusVerdict judge_rebus(const QuestId& quest_id, const std::vector<PlayerId>& participants,
                           const std::string& phrase) const;

  // Runs `fn` as one atomic command. Nested calls join the outer command.
  template <class Fn>
  auto transact(Fn&& fn) -> decltype(fn());

  const Player& player(const PlayerId& id) const;
  const QuestSpec& quest_spec(const QuestId& id) const;

  // Whole-world checkpoint, for callers that must undo a committed command
  // (the server does when the journal append fails).
  struct Checkpoint {
    GameState state;
    std::shared_ptr<const tracker::Snapshot> positions;
  };
  Checkpoint checkpoint() const { return {state_, tracker_->snapshot()}; }
  void rollback(Checkpoint cp);

 private:
  Player& player_mut(const PlayerId& id);
  const Npc& npc(const NpcId& id) const;
  ItemInstance& item_mut(const ItemId& id);
  void require_fresh(const LocationFix& fix, std::int64_t now_ms) const;
  DialogView view_of(const Npc& npc, const NodeId& node_id) const;
  EffectResult apply_effect(Player& p, const Npc& npc, const Effect& effect, std::int64_t now_ms,
                            std::vector<QuestEvent>& events);

  GameState state_;
  std::unique_ptr<tracker::Tracker> tracker_;
  int depth_ = 0;
};

template <class Fn>
auto Engine::transact(Fn&& fn) -> decltype(fn()) {
  if (depth_ > 0) return fn();
  Checkpoint cp = checkpoint();
  ++depth_;
  try {
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      --depth_;
      ++state_.event_counter;
    } else {
      decltype(auto) result = fn();
      --depth_;
      ++state_.event_counter;
      return result;
    }
  } catch (...) {
    --depth_;
    rollback(std::move(cp));
    throw;
  }
}

}  // namespace mep::engine
