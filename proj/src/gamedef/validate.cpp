#include <cmath>
#include <deque>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "mep/engine/phrase.hpp"
#include "mep/gamedef/gamedef.hpp"

namespace mep::gamedef {

std::string_view to_string(IntegrityCode code) {
  switch (code) {
    case IntegrityCode::E_DANGLING_REF: return "E_DANGLING_REF";
    case IntegrityCode::E_DUP_ID: return "E_DUP_ID";
    case IntegrityCode::E_BAD_COORD: return "E_BAD_COORD";
    case IntegrityCode::E_EMPTY_SOLUTION: return "E_EMPTY_SOLUTION";
    case IntegrityCode::E_ZERO_COUNT: return "E_ZERO_COUNT";
    case IntegrityCode::E_FRAGMENT_GAP: return "E_FRAGMENT_GAP";
    case IntegrityCode::E_UNREACHABLE_NODE: return "E_UNREACHABLE_NODE";
    case IntegrityCode::E_BAD_RADIUS: return "E_BAD_RADIUS";
  }
  return "?";
}

nlohmann::json to_json(const std::vector<IntegrityError>& errors) {
  auto out = nlohmann::json::array();
  for (const auto& e : errors) {
    out.push_back({{"code", to_string(e.code)}, {"path", e.path}, {"message", e.message}});
  }
  return out;
}

namespace {

using Code = IntegrityCode;

class Checker {
 public:
  explicit Checker(const GameDefinition& def) : def_(def) {}

  std::vector<IntegrityError> run() {
    check_params();
    for (const auto& q : def_.quests) quest_ids_.emplace(q.id, &q);
    for (const auto& n : def_.npcs) check_npc(n);
    check_items();
    check_quests();
    return std::move(errors_);
  }

 private:
  void add(Code code, const SourcePath& path, std::string message) {
    errors_.push_back({code, path, std::move(message)});
  }

  void coord(const Coord& c, const SourcePath& path, const std::string& what) {
    const bool ok = std::isfinite(c.lat) && std::isfinite(c.lon) && c.lat >= -90.0 &&
                    c.lat <= 90.0 && c.lon >= -180.0 && c.lon <= 180.0;
    if (!ok) {
      add(Code::E_BAD_COORD, path,
          what + " has coordinate (" + std::to_string(c.lat) + ", " + std::to_string(c.lon) +
              ") outside lat [-90, 90], lon [-180, 180]");
    }
  }

  void check_params() {
    const auto& p = def_.params;
    auto positive = [&](const std::optional<double>& v, const char* name) {
      if (v && !(std::isfinite(*v) && *v > 0.0)) {
        add(Code::E_BAD_RADIUS, p.path, std::string(name) + " must be a positive distance");
      }
    };
    positive(p.collect_radius_m, "collect-radius-m");
    positive(p.visibility_radius_m, "visibility-radius-m");
    if (p.npc_interaction_radius_m &&
        !(std::isfinite(*p.npc_interaction_radius_m) && *p.npc_interaction_radius_m >= 0.0)) {
      add(Code::E_BAD_RADIUS, p.path, "npc-radius-m must be >= 0");
    }
    if (p.max_fix_age_s && !(std::isfinite(*p.max_fix_age_s) && *p.max_fix_age_s > 0.0)) {
      add(Code::E_ZERO_COUNT, p.path, "max-fix-age-s must be > 0");
    }
    if (p.history_cap && *p.history_cap < 1) {
      add(Code::E_ZERO_COUNT, p.path, "history-cap must be >= 1");
    }
  }

  void check_npc(const NpcDef& n) {
    if (!npc_ids_.insert(n.id).second) add(Code::E_DUP_ID, n.path, "duplicate npc id '" + n.id + "'");
    coord(n.at, n.path, "npc '" + n.id + "'");
    if (n.radius_m && !(std::isfinite(*n.radius_m) && *n.radius_m >= 0.0)) {
      add(Code::E_BAD_RADIUS, n.path, "npc '" + n.id + "' radius-m must be >= 0");
    }
    if (n.dialog) check_dialog(n, *n.dialog);
  }

  void check_dialog(const NpcDef& n, const DialogDef& d) {
    std::map<std::string, const NodeDef*> nodes;
    for (const auto& node : d.nodes) {
      if (!nodes.emplace(node.id, &node).second) {
        add(Code::E_DUP_ID, node.path, "duplicate node id '" + node.id + "' in npc '" + n.id + "'");
      }
    }
    for (const auto& node : d.nodes) {
      for (const auto& c : node.choices) check_choice(n, nodes, c);
    }
    const auto root = nodes.find(d.root);
    if (root == nodes.end()) {
      add(Code::E_DANGLING_REF, d.path, "dialog root '" + d.root + "' is not a node");
      return;
    }
    std::set<std::string> seen{d.root};
    std::deque<const NodeDef*> todo{root->second};
    while (!todo.empty()) {
      const NodeDef* cur = todo.front();
      todo.pop_front();
      for (const auto& c : cur->choices) {
        if (!c.next) continue;
        const auto it = nodes.find(*c.next);
        if (it != nodes.end() && seen.insert(*c.next).second) todo.push_back(it->second);
      }
    }
    std::set<std::string> reported;
    for (const auto& node : d.nodes) {
      if (!seen.contains(node.id) && reported.insert(node.id).second) {
        add(Code::E_UNREACHABLE_NODE, node.path,
            "node '" + node.id + "' of npc '" + n.id + "' is unreachable from the root");
      }
    }
  }

  void check_choice(const NpcDef& n, const std::map<std::string, const NodeDef*>& nodes,
                    const ChoiceDef& c) {
    if (c.next && !nodes.contains(*c.next)) {
      add(Code::E_DANGLING_REF, c.path, "choice leads to unknown node '" + *c.next + "'");
    }
    if (c.effect == engine::EffectKind::none) {
      if (!c.quest_id.empty() && !quest_ids_.contains(c.quest_id)) {
        add(Code::E_DANGLING_REF, c.path, "choice names unknown quest '" + c.quest_id + "'");
      }
      return;
    }
    const auto it = quest_ids_.find(c.quest_id);
    if (it == quest_ids_.end()) {
      add(Code::E_DANGLING_REF, c.path,
          std::string(engine::to_string(c.effect)) + " in npc '" + n.id +
              "' names unknown quest '" + c.quest_id + "'");
      return;
    }
    if (c.effect == engine::EffectKind::give_fragment && it->second->kind != QuestKindTag::rebus) {
      add(Code::E_DANGLING_REF, c.path,
          "give_fragment names quest '" + c.quest_id + "', which is not a rebus");
    }
  }

  void check_items() {
    std::map<std::string, long> per_kind;
    for (const auto& p : def_.item_placements) {
      if (p.at) coord(*p.at, p.path, "item placement of '" + p.kind + "'");
      for (const auto& c : p.points) coord(c, p.path, "item placement of '" + p.kind + "'");
      if (p.count < 1) {
        add(Code::E_ZERO_COUNT, p.path, "item placement of '" + p.kind + "' has count < 1");
        continue;
      }
      long& ordinal = per_kind[p.kind];
      for (long i = 0; i < p.count; ++i, ++ordinal) {
        const std::string id = p.kind + "#" + std::to_string(ordinal);
        if (npc_ids_.contains(id)) {
          add(Code::E_DUP_ID, p.path, "item instance id '" + id + "' collides with an npc id");
        }
      }
    }
  }

  void check_quests() {
    std::set<std::string> seen;
    for (const auto& q : def_.quests) {
      if (!seen.insert(q.id).second) add(Code::E_DUP_ID, q.path, "duplicate quest id '" + q.id + "'");
      switch (q.kind) {
        case QuestKindTag::reach:
          if (q.target) coord(*q.target, q.path, "target of quest '" + q.id + "'");
          if (!(std::isfinite(q.target_radius_m) && q.target_radius_m > 0.0)) {
            add(Code::E_BAD_RADIUS, q.path, "target radius of quest '" + q.id + "' must be > 0");
          }
          break;
        case QuestKindTag::collect:
          if (q.required_count < 1) {
            add(Code::E_ZERO_COUNT, q.path, "collect quest '" + q.id + "' requires fewer than 1 item");
          }
          if (!npc_ids_.contains(q.completion_npc)) {
            add(Code::E_DANGLING_REF, q.path,
                "collect quest '" + q.id + "' names unknown completion npc '" + q.completion_npc + "'");
          }
          break;
        case QuestKindTag::rebus:
          check_rebus(q);
          break;
      }
    }
  }

  void check_rebus(const QuestDef& q) {
    if (engine::normalize_phrase(q.solution).empty()) {
      add(Code::E_EMPTY_SOLUTION, q.path, "rebus '" + q.id + "' solution normalizes to nothing");
    }
    if (q.min_players < 2) {
      add(Code::E_ZERO_COUNT, q.path, "rebus '" + q.id + "' min-players must be >= 2");
    }
    if (q.fragments.empty()) {
      add(Code::E_ZERO_COUNT, q.path, "rebus '" + q.id + "' has no fragments");
      return;
    }
    std::set<long> indices;
    for (const auto& f : q.fragments) {
      if (!indices.insert(f.index).second) {
        add(Code::E_DUP_ID, f.path, "duplicate fragment index " + std::to_string(f.index));
      }
    }
    const long n = static_cast<long>(indices.size());
    if (*indices.begin() != 0 || *indices.rbegin() != n - 1) {
      add(Code::E_FRAGMENT_GAP, q.path,
          "rebus '" + q.id + "' fragment indices are not 0.." + std::to_string(n - 1));
    }
  }

  const GameDefinition& def_;
  std::vector<IntegrityError> errors_;
  std::set<std::string> npc_ids_;
  std::map<std::string, const QuestDef*> quest_ids_;
};

}  // namespace

std::vector<IntegrityError> validate(const GameDefinition& def) { return Checker(def).run(); }

}  // namespace mep::gamedef
