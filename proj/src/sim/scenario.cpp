#include "mep/sim/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mep/error.hpp"
#include "mep/gamedef/xml_dom.hpp"

namespace mep::sim {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); }

geo::GeoPoint point_of(const json& p) {
  if (!p.is_array() || p.size() != 2) invalid("a point is [lat, lon]");
  return geo::GeoPoint(p[0].get<double>(), p[1].get<double>());
}

std::vector<geo::GeoPoint> points_of(const json& arr) {
  if (!arr.is_array()) invalid("a track is an array of [lat, lon] points");
  std::vector<geo::GeoPoint> out;
  for (const auto& p : arr) out.push_back(point_of(p));
  return out;
}

Predicate predicate_of(const json& j) {
  if (!j.is_object()) invalid("a predicate is an object");
  Predicate p;
  if (j.contains("quest")) {
    p.kind = Predicate::Kind::quest_state;
    p.quest_id = j.at("quest").get<std::string>();
    p.state = j.value("state", "completed");
  } else if (j.contains("inventory")) {
    p.kind = Predicate::Kind::inventory_count;
    p.item_kind = j.at("inventory").get<std::string>();
    p.count = j.at("count").get<long>();
  } else if (j.contains("fragment")) {
    p.kind = Predicate::Kind::has_fragment;
    p.quest_id = j.at("fragment").get<std::string>();
  } else if (j.contains("consent_rejections_at_least")) {
    p.kind = Predicate::Kind::consent_rejections_at_least;
    p.count = j.at("consent_rejections_at_least").get<long>();
  } else {
    invalid("unknown predicate " + j.dump());
  }
  return p;
}

Action action_of(const json& j) {
  if (!j.is_object()) invalid("a script step is an object");
  Action a;
  if (j.contains("walk_to_distance")) {
    a.kind = Action::Kind::walk_to_distance;
    const json& d = j.at("walk_to_distance");
    if (d.is_string()) {
      if (d != "end") invalid("walk_to_distance is metres or \"end\"");
      a.distance_m = kTrackEnd;
    } else {
      a.distance_m = d.get<double>();
    }
    a.collect_kind = j.value("collect", "");
  } else if (j.contains("talk")) {
    a.kind = Action::Kind::talk;
    a.npc_id = j.at("talk").get<std::string>();
    a.choices = j.value("choices", std::vector<std::size_t>{});
  } else if (j.contains("accept")) {
    a.kind = Action::Kind::accept;
    a.quest_id = j.at("accept").get<std::string>();
  } else if (j.contains("collect_nearest")) {
    a.kind = Action::Kind::collect_nearest;
    a.item_kind = j.at("collect_nearest").get<std::string>();
  } else if (j.contains("submit_rebus")) {
    a.kind = Action::Kind::submit_rebus;
    a.quest_id = j.at("submit_rebus").get<std::string>();
    a.phrase = j.at("phrase").get<std::string>();
    a.participants = j.value("participants", std::vector<std::string>{});
    a.expect_outcome = j.value("expect", "accepted");
  } else if (j.contains("expect")) {
    a.kind = Action::Kind::expect;
    a.predicate = predicate_of(j.at("expect"));
  } else if (j.contains("wait_for")) {
    a.kind = Action::Kind::wait_for;
    a.predicate = predicate_of(j.at("wait_for"));
  } else if (j.contains("wait")) {
    a.kind = Action::Kind::wait;
    a.ticks = j.at("wait").get<long>();
  } else {
    invalid("unknown script step " + j.dump());
  }
  return a;
}

// XML attributes arrive as strings; turn the ones that are numbers, lists or
// booleans into JSON of the matching type so both forms share one reader.
json xml_value(std::string_view key, const std::string& v) {
  static const std::set<std::string_view> numbers = {
      "seed", "start_ms", "stuck_ticks", "max_rounds", "speed_mps", "tick_s", "walk_to_distance",
      "count", "wait", "consent_rejections_at_least", "lat", "lon"};
  if (numbers.contains(key)) {
    try {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      if (key == "seed" || key == "start_ms") return std::stoll(v);
      return d;
    } catch (const std::exception&) {
      invalid("attribute " + std::string(key) + " is not a number: " + v);
    }
  }
  if (key == "consent") {
    if (v != "true" && v != "false") invalid("consent must be true or false");
    return v == "true";
  }
  if (key == "choices" || key == "participants") {
    json arr = json::array();
    std::istringstream in(v);
    for (std::string tok; in >> tok;) {
      if (key == "choices") arr.push_back(std::stoul(tok));
      else arr.push_back(tok);
    }
    return arr;
  }
  return v;
}

std::string snake(std::string s) {
  for (char& c : s) if (c == '-') c = '_';
  return s;
}

json attrs_json(const gamedef::XmlElement& e) {
  json j = json::object();
  for (const auto& [k, v] : e.attributes) {
    const std::string key = snake(k);
    j[key] = xml_value(key, v);
  }
  return j;
}

json step_json(const gamedef::XmlElement& e) {
  const std::string kind = snake(e.name);
  json attrs = attrs_json(e);
  json step = json::object();
  auto take = [&](const char* from, const char* to) {
    if (attrs.contains(from)) {
      step[to] = attrs[from];
      attrs.erase(from);
    }
  };
  if (kind == "walk_to_distance") {
    take("m", "walk_to_distance");
    if (step.contains("walk_to_distance") && step["walk_to_distance"] != "end") {
      step["walk_to_distance"] = xml_value("walk_to_distance", step["walk_to_distance"].get<std::string>());
    }
  } else if (kind == "talk") {
    take("npc", "talk");
  } else if (kind == "accept") {
    take("quest", "accept");
  } else if (kind == "collect_nearest") {
    take("kind", "collect_nearest");
  } else if (kind == "submit_rebus") {
    take("quest", "submit_rebus");
  } else if (kind == "wait") {
    take("ticks", "wait");
    if (step.contains("wait")) step["wait"] = xml_value("wait", step["wait"].get<std::string>());
  } else if (kind == "expect" || kind == "wait_for") {
    step[kind] = attrs;
    return step;
  } else {
    invalid("unknown script element <" + e.name + ">");
  }
  for (auto& [k, v] : attrs.items()) step[k] = v;
  return step;
}

}  // namespace

Scenario scenario_from_json(const json& j) {
  try {
    Scenario s;
    s.name = j.at("name").get<std::string>();
    s.seed = j.value("seed", s.seed);
    s.start_ms = j.value("start_ms", s.start_ms);
    s.stuck_ticks = j.value("stuck_ticks", s.stuck_ticks);
    s.max_rounds = j.value("max_rounds", s.max_rounds);
    const json tracks = j.value("tracks", json::object());
    for (const auto& b : j.at("bots")) {
      BotSpec bot;
      bot.player_id = b.at("player_id").get<std::string>();
      bot.display_name = b.value("display_name", bot.player_id);
      if (b.contains("at")) {
        bot.track = {point_of(b.at("at"))};
      } else {
        const json& t = b.at("track");
        if (t.is_string()) {
          if (!tracks.contains(t.get<std::string>())) invalid("unknown track " + t.get<std::string>());
          bot.track = points_of(tracks.at(t.get<std::string>()));
        } else {
          bot.track = points_of(t);
        }
      }
      if (b.contains("speed_mps")) {
        bot.speed_mps = b.at("speed_mps").get<double>();
      } else {
        const std::string preset = b.value("speed", "walk");
        if (preset == "walk") bot.speed_mps = kWalkMps;
        else if (preset == "cycle") bot.speed_mps = kCycleMps;
        else invalid("unknown speed preset " + preset);
      }
      bot.tick_s = b.value("tick_s", bot.tick_s);
      bot.consent = b.value("consent", bot.consent);
      for (const auto& step : b.value("script", json::array())) bot.script.push_back(action_of(step));
      s.bots.push_back(std::move(bot));
    }
    return s;
  } catch (const json::exception& e) {
    invalid(std::string("malformed scenario: ") + e.what());
  }
}

Scenario scenario_from_xml(const std::string& text, const std::string& document_name) {
  const gamedef::XmlElement root = gamedef::parse_xml(text, document_name);
  if (root.name != "scenario") invalid("root element must be <scenario>");
  json j = attrs_json(root);
  json tracks = json::object();
  json bots = json::array();
  for (const auto& child : root.children) {
    if (child.name == "track") {
      const std::string* id = child.attribute("id");
      if (!id) invalid("<track> needs an id");
      json pts = json::array();
      for (const auto& p : child.children) {
        const json a = attrs_json(p);
        pts.push_back({a.at("lat"), a.at("lon")});
      }
      tracks[*id] = pts;
    } else if (child.name == "bot") {
      json b = attrs_json(child);
      if (b.contains("at_lat")) {
        b["at"] = {std::stod(b["at_lat"].get<std::string>()), std::stod(b["at_lon"].get<std::string>())};
        b.erase("at_lat");
        b.erase("at_lon");
      }
      json script = json::array();
      for (const auto& step : child.children) script.push_back(step_json(step));
      b["script"] = script;
      bots.push_back(b);
    } else {
      invalid("unknown element <" + child.name + "> in scenario");
    }
  }
  j["tracks"] = tracks;
  j["bots"] = bots;
  return scenario_from_json(j);
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) invalid("cannot read scenario " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  if (path.extension() == ".xml") return scenario_from_xml(buf.str(), path.filename().string());
  const json j = json::parse(buf.str(), nullptr, false);
  if (j.is_discarded()) invalid("scenario " + path.string() + " is not valid JSON");
  return scenario_from_json(j);
}

void check_scenario(const Scenario& s, const gamedef::GameDefinition& def) {
  std::set<std::string> npcs, quests, kinds, bots;
  for (const auto& n : def.npcs) npcs.insert(n.id);
  for (const auto& q : def.quests) quests.insert(q.id);
  for (const auto& p : def.item_placements) kinds.insert(p.kind);
  for (const auto& b : s.bots) {
    if (!bots.insert(b.player_id).second) invalid("duplicate bot " + b.player_id);
  }
  if (s.bots.empty()) invalid("scenario " + s.name + " has no bots");
  if (s.stuck_ticks <= 0 || s.max_rounds <= 0) invalid("stuck_ticks and max_rounds must be positive");
  for (const auto& b : s.bots) {
    const std::string who = "bot " + b.player_id + ": ";
    if (!(b.speed_mps > 0)) invalid(who + "speed must be positive");
    if (!(b.tick_s > 0)) invalid(who + "tick must be positive");
    if (b.track.empty()) invalid(who + "needs a track or a position");
    const double length = b.track.size() > 1 ? geo::Track(b.track).length_m() : 0.0;
    for (std::size_t i = 0; i < b.script.size(); ++i) {
      const Action& a = b.script[i];
      const std::string at = who + "step " + std::to_string(i) + ": ";
      auto need_quest = [&](const std::string& q) {
        if (!quests.contains(q)) invalid(at + "unknown quest " + q);
      };
      auto need_kind = [&](const std::string& k) {
        if (k != "*" && !kinds.contains(k)) invalid(at + "unknown item kind " + k);
      };
      switch (a.kind) {
        case Action::Kind::walk_to_distance:
          if (a.distance_m != kTrackEnd && (a.distance_m < 0 || a.distance_m > length * (1 + 1e-12))) {
            invalid(at + "distance outside the track");
          }
          if (!a.collect_kind.empty()) need_kind(a.collect_kind);
          break;
        case Action::Kind::talk:
          if (!npcs.contains(a.npc_id)) invalid(at + "unknown npc " + a.npc_id);
          break;
        case Action::Kind::accept:
          need_quest(a.quest_id);
          break;
        case Action::Kind::collect_nearest:
          need_kind(a.item_kind);
          break;
        case Action::Kind::submit_rebus:
          need_quest(a.quest_id);
          for (const auto& p : a.participants) {
            if (!bots.contains(p)) invalid(at + "participant " + p + " is not a bot");
          }
          break;
        case Action::Kind::expect:
        case Action::Kind::wait_for:
          if (a.predicate.kind == Predicate::Kind::quest_state ||
              a.predicate.kind == Predicate::Kind::has_fragment) {
            need_quest(a.predicate.quest_id);
          }
          if (a.predicate.kind == Predicate::Kind::inventory_count) need_kind(a.predicate.item_kind);
          break;
        case Action::Kind::wait:
          if (a.ticks < 0) invalid(at + "negative wait");
          break;
      }
    }
  }
}

}  // namespace mep::sim
