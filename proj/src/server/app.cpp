#include "mep/server/app.hpp"

#include <charconv>
#include <iostream>
#include <string_view>
#include <vector>

#include "mep/engine/serialize.hpp"

namespace mep::server {

using nlohmann::json;
namespace fs = std::filesystem;

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidCoordinate:
    case ErrorCode::ParseError:
      return 400;
    case ErrorCode::Unauthorized:
      return 401;
    case ErrorCode::ConsentRequired:
      return 403;
    case ErrorCode::UnknownEntity:
    case ErrorCode::UnknownPlayer:
    case ErrorCode::UnknownNpc:
    case ErrorCode::UnknownQuest:
    case ErrorCode::UnknownItem:
    case ErrorCode::NoRoute:
      return 404;
    case ErrorCode::DuplicateEntity:
    case ErrorCode::DuplicatePlayer:
    case ErrorCode::SessionActive:
    case ErrorCode::StaleTimestamp:
    case ErrorCode::WrongNode:
    case ErrorCode::NoFragmentsLeft:
    case ErrorCode::QuestAlreadyCompleted:
    case ErrorCode::AlreadyActive:
    case ErrorCode::AlreadyCompleted:
    case ErrorCode::NotInWorld:
    case ErrorCode::NotHeld:
      return 409;
    case ErrorCode::OutOfRange:
    case ErrorCode::NoFix:
    case ErrorCode::StaleFix:
    case ErrorCode::BadChoice:
    case ErrorCode::NoFragment:
    case ErrorCode::NotOffered:
    case ErrorCode::NotRebus:
    case ErrorCode::WrongPhrase:
    case ErrorCode::IncompleteCoverage:
    case ErrorCode::TooFewPlayers:
    case ErrorCode::QuestInactive:
      return 422;
    case ErrorCode::StorageFailure:
      return 503;
    default:
      return 500;
  }
}

Response error_response(const Error& e) {
  json err{{"code", wire_name(e.code())}, {"message", e.what()}};
  if (!e.details().is_null()) err["details"] = e.details();
  return {http_status(e.code()), json{{"error", std::move(err)}}};
}

namespace {

[[noreturn]] void bad_request(const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); }

std::vector<std::string_view> split_path(std::string_view path) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < path.size()) {
    if (path[pos] == '/') {
      ++pos;
      continue;
    }
    const std::size_t end = std::min(path.find('/', pos), path.size());
    out.push_back(path.substr(pos, end - pos));
    pos = end;
  }
  return out;
}

double parse_double(const std::string& s, const char* what) {
  double v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) bad_request(std::string("bad number for ") + what);
  return v;
}

std::int64_t parse_int(const std::string& s, const char* what) {
  std::int64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) bad_request(std::string("bad integer for ") + what);
  return v;
}

const std::string& query_field(const Request& req, const char* key) {
  const auto it = req.query.find(key);
  if (it == req.query.end()) bad_request(std::string("missing query parameter ") + key);
  return it->second;
}

std::string str_field(const json& body, const char* key) {
  const auto it = body.find(key);
  if (it == body.end() || !it->is_string()) bad_request(std::string("missing string field ") + key);
  return it->get<std::string>();
}

double num_field(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) bad_request(std::string("missing number field ") + key);
  return it->get<double>();
}

tracker::KindFilter kind_filter(const Request& req) {
  tracker::KindFilter f;
  const auto it = req.query.find("kind");
  if (it == req.query.end() || it->second.empty()) return f;
  std::string_view rest = it->second;
  while (!rest.empty()) {
    const std::size_t comma = std::min(rest.find(','), rest.size());
    const auto k = tracker::parse_entity_kind(rest.substr(0, comma));
    if (!k) bad_request("unknown entity kind " + std::string(rest.substr(0, comma)));
    f.add(*k);
    rest.remove_prefix(std::min(comma + 1, rest.size()));
  }
  return f;
}

// Query-string locations are accepted on GET endpoints that act on the
// caller's own position; nearby and bbox take a search area instead.
bool takes_query_location(const std::vector<std::string_view>& seg) {
  return !(seg.size() == 3 && seg[0] == "api" && seg[1] == "track" &&
           (seg[2] == "nearby" || seg[2] == "bbox"));
}

// The consent gate. Whatever else the request holds, a location without
// consent:true rejects it before anything is parsed further or stored.
std::optional<tracker::LocationFix> extract_location(const Request& req, const json& body,
                                                     const std::vector<std::string_view>& seg,
                                                     std::int64_t now_ms) {
  std::optional<double> lat, lon;
  std::optional<std::int64_t> ts;
  if (const auto it = body.find("location"); it != body.end()) {
    const json& loc = *it;
    if (!loc.is_object()) bad_request("location must be an object");
    const auto c = loc.find("consent");
    if (c == loc.end() || !c->is_boolean() || !c->get<bool>()) {
      throw Error(ErrorCode::ConsentRequired, "location sent without consent:true");
    }
    lat = num_field(loc, "lat");
    lon = num_field(loc, "lon");
    if (const auto t = loc.find("timestamp_ms"); t != loc.end() && !t->is_null()) {
      if (!t->is_number_integer()) bad_request("timestamp_ms must be an integer");
      ts = t->get<std::int64_t>();
    }
  } else if (takes_query_location(seg)) {
    const auto& q = req.query;
    const bool any = q.contains("lat") || q.contains("lon") || q.contains("consent") ||
                     q.contains("timestamp_ms");
    if (!any) return std::nullopt;
    const auto c = q.find("consent");
    if (c == q.end() || c->second != "true") {
      throw Error(ErrorCode::ConsentRequired, "location sent without consent=true");
    }
    lat = parse_double(query_field(req, "lat"), "lat");
    lon = parse_double(query_field(req, "lon"), "lon");
    if (const auto t = q.find("timestamp_ms"); t != q.end()) ts = parse_int(t->second, "timestamp_ms");
  } else {
    return std::nullopt;
  }
  return tracker::LocationFix{geo::GeoPoint(*lat, *lon), ts.value_or(now_ms), true,
                              tracker::FixSource::client_request};
}

json entity_summary(const engine::GameState& game, const tracker::TrackedEntity& e,
                    double distance_m) {
  json j{{"entity_id", e.entity_id},
         {"kind", tracker::to_string(e.kind)},
         {"lat", e.last_fix->point.lat_deg()},
         {"lon", e.last_fix->point.lon_deg()},
         {"distance_m", distance_m}};
  if (e.kind == tracker::EntityKind::npc) {
    if (const auto it = game.npcs.find(e.entity_id); it != game.npcs.end()) j["name"] = it->second.name;
  } else if (e.kind == tracker::EntityKind::item) {
    if (const auto it = game.items.find(e.entity_id); it != game.items.end()) {
      j["item_kind"] = it->second.kind;
    }
  } else if (const auto it = game.players.find(e.entity_id); it != game.players.end()) {
    j["name"] = it->second.display_name;
  }
  return j;
}

json quest_entry(const engine::GameState& game, const engine::QuestInstance& q) {
  json j = engine::to_json(q);
  const auto& spec = game.quest_specs.at(q.quest_id);
  j["title"] = spec.title;
  j["kind"] = engine::quest_kind_name(spec.kind);
  if (const auto* c = std::get_if<engine::Collect>(&spec.kind)) {
    j["required_count"] = c->required_count;
    j["item_kind"] = c->item_kind;
  }
  return j;
}

json inventory_of(const engine::GameState& game, const engine::Player& p) {
  json inv = json::array();
  for (const auto& id : p.inventory) inv.push_back({{"item_id", id}, {"kind", game.items.at(id).kind}});
  return inv;
}

}  // namespace

App::App(gamedef::GameDefinition def, const Clock& clock, AppOptions options,
         ManualClock* manual_clock)
    : def_(std::move(def)),
      clock_(clock),
      manual_clock_(manual_clock),
      options_(std::move(options)),
      sessions_(options_.seed, options_.session_idle_ms) {
  if (options_.journal) {
    const fs::path& path = *options_.journal;
    const JournalContents contents = read_journal(path);
    if (contents.torn_tail) {
      std::cerr << "mep: discarding an incomplete final journal line\n";
      fs::resize_file(path, contents.valid_bytes);
    }
    ReplayResult r = replay(path, def_);
    engine_ = std::move(r.engine);
    seq_ = r.last_seq;
    journal_ = std::make_unique<JournalWriter>(path, options_.durable);
  } else {
    engine_ = gamedef::instantiate(def_);
  }
  publish_locked(engine::state_digest(*engine_));
}

void App::publish_locked(std::string digest) {
  View v{std::make_shared<const engine::GameState>(engine_->state()), engine_->tracker().snapshot(),
         seq_, std::move(digest)};
  std::lock_guard lock(view_mu_);
  view_ = std::move(v);
}

App::View App::view() const {
  std::lock_guard lock(view_mu_);
  return view_;
}

std::uint64_t App::last_seq() const { return view().seq; }

std::string App::state_digest() const { return view().digest; }

std::uint64_t App::fixes_stored() const { return view().positions->fixes_stored(); }

std::string App::full_digest() const {
  std::lock_guard lock(write_mu_);
  return engine::full_digest(*engine_);
}

json App::execute(const engine::Command& cmd) {
  std::lock_guard lock(write_mu_);
  return execute_locked(cmd);
}

json App::execute_locked(const engine::Command& cmd) {
  const std::int64_t ts = now();
  engine::Engine::Checkpoint cp = engine_->checkpoint();
  json body = engine::apply_command(*engine_, cmd, ts);
  const std::uint64_t seq = seq_ + 1;
  std::string digest = engine::state_digest(*engine_);
  if (journal_) {
    try {
      journal_->append({seq, ts, engine::to_json(cmd), digest});
    } catch (const Error&) {
      engine_->rollback(std::move(cp));
      throw;
    }
  }
  seq_ = seq;
  publish_locked(std::move(digest));
  if (journal_ && options_.snapshot_every > 0 && seq % options_.snapshot_every == 0) {
    try {
      write_snapshot(journal_->path(), seq, *engine_);
    } catch (const Error& e) {
      std::cerr << "mep: snapshot skipped: " << e.what() << '\n';
    }
  }
  body["seq"] = seq;
  return body;
}

engine::PlayerId App::require_player(const Request& req) {
  if (req.token.empty()) throw Error(ErrorCode::Unauthorized, "missing session token");
  auto pid = sessions_.authenticate(req.token, now());
  if (!pid) throw Error(ErrorCode::Unauthorized, "unknown or expired session");
  return *pid;
}

Response App::open_session(const json& body) {
  const std::string pid = str_field(body, "player_id");
  if (pid.empty()) bad_request("player_id must not be empty");
  std::string name = pid;
  if (const auto it = body.find("display_name"); it != body.end() && !it->is_null()) {
    if (!it->is_string()) bad_request("display_name must be a string");
    name = it->get<std::string>();
  }
  std::lock_guard lock(write_mu_);
  json out;
  bool resumed = engine_->state().players.contains(pid);
  if (resumed) {
    if (sessions_.has_live_session(pid, now())) {
      throw Error(ErrorCode::SessionActive, "player " + pid + " already has a live session");
    }
    out["seq"] = seq_;
  } else {
    out = execute_locked(engine::JoinPlayer{pid, name});
  }
  const Session s = sessions_.open(pid, now());
  out["token"] = s.token;
  out["player_id"] = pid;
  out["resumed"] = resumed;
  return {200, std::move(out)};
}

Response App::handle(const Request& req) {
  try {
    json body = json::object();
    if (!req.body.empty()) {
      body = json::parse(req.body, nullptr, false);
      if (body.is_discarded()) bad_request("malformed JSON body");
      if (!body.is_object()) bad_request("request body must be a JSON object");
    }
    const auto seg = split_path(req.path);
    const auto location = extract_location(req, body, seg, now());
    return route(req, body, location);
  } catch (const Error& e) {
    return error_response(e);
  } catch (const json::exception& e) {
    return error_response(Error(ErrorCode::InvalidArgument, e.what()));
  } catch (const std::exception& e) {
    return {500, json{{"error", {{"code", "INTERNAL"}, {"message", e.what()}}}}};
  }
}

Response App::route(const Request& req, const json& body,
                    const std::optional<tracker::LocationFix>& location) {
  using namespace engine;
  const auto seg = split_path(req.path);
  const bool get = req.method == "GET";
  const bool post = req.method == "POST";
  auto is = [&](std::initializer_list<std::string_view> pattern) {
    if (seg.size() != pattern.size()) return false;
    std::size_t i = 0;
    for (const auto& p : pattern) {
      if (p != "*" && seg[i] != p) return false;
      ++i;
    }
    return true;
  };
  auto ok = [](json j) { return Response{200, std::move(j)}; };

  // --- public ---------------------------------------------------------
  if (post && is({"api", "session"})) return open_session(body);
  if (get && is({"api", "game", "info"})) {
    const View v = view();
    json npcs = json::array();
    for (const auto& [id, npc] : v.game->npcs) {
      npcs.push_back({{"npc_id", id},
                      {"name", npc.name},
                      {"lat", npc.location.lat_deg()},
                      {"lon", npc.location.lon_deg()},
                      {"interaction_radius_m", npc.interaction_radius_m}});
    }
    json quests = json::array();
    for (const auto& [id, spec] : v.game->quest_specs) {
      quests.push_back({{"quest_id", id}, {"title", spec.title}, {"kind", quest_kind_name(spec.kind)}});
    }
    const Parameters& p = v.game->params;
    return ok({{"game_id", v.game->game_id},
               {"title", def_.title},
               {"params",
                {{"collect_radius_m", p.collect_radius_m},
                 {"npc_interaction_radius_m", p.npc_interaction_radius_m},
                 {"max_fix_age_ms", p.max_fix_age_ms},
                 {"history_cap", p.history_cap},
                 {"visibility_radius_m", p.visibility_radius_m}}},
               {"npcs", std::move(npcs)},
               {"quests", std::move(quests)}});
  }
  if (get && is({"api", "state", "digest"})) {
    const View v = view();
    return ok({{"seq", v.seq}, {"state_digest", v.digest}});
  }
  if (post && is({"api", "admin", "clock"})) {
    if (!manual_clock_) throw Error(ErrorCode::NoRoute, "the server runs on the system clock");
    if (body.contains("set_ms")) manual_clock_->set(body.at("set_ms").get<std::int64_t>());
    if (body.contains("advance_ms")) manual_clock_->advance(body.at("advance_ms").get<std::int64_t>());
    return ok({{"now_ms", manual_clock_->now_ms()}});
  }

  const bool known = (post && is({"api", "track", "update"})) ||
                     (get && is({"api", "track", "state", "*"})) ||
                     (get && is({"api", "track", "nearby"})) || (get && is({"api", "track", "bbox"})) ||
                     (get && is({"api", "game", "map"})) || (get && is({"api", "game", "quests"})) ||
                     (get && is({"api", "game", "player"})) ||
                     (get && is({"api", "game", "npc", "*", "dialog"})) ||
                     (post && is({"api", "game", "npc", "*", "choose"})) ||
                     (post && is({"api", "game", "quest", "*", "accept"})) ||
                     (post && is({"api", "game", "quest", "*", "collect"})) ||
                     (post && is({"api", "game", "item", "*", "collect"})) ||
                     (post && is({"api", "game", "item", "*", "drop"})) ||
                     (post && is({"api", "game", "item", "*", "give"})) ||
                     (get && is({"api", "game", "rebus", "*", "fragment"})) ||
                     (post && is({"api", "game", "rebus", "*", "answer"}));
  if (!known) throw Error(ErrorCode::NoRoute, "no endpoint " + req.method + " " + req.path);

  const PlayerId me = require_player(req);
  auto need_location = [&]() -> const LocationFix& {
    if (!location) bad_request("this endpoint needs a location");
    return *location;
  };

  // --- tracker --------------------------------------------------------
  if (is({"api", "track", "update"})) return ok(execute(PushLocation{me, need_location()}));
  if (is({"api", "track", "state", "*"})) {
    const View v = view();
    const auto* e = v.positions->find(seg[3]);
    if (!e) throw Error(ErrorCode::UnknownEntity, "unknown entity " + std::string(seg[3]));
    const auto h = req.query.find("history");
    return ok(tracker::to_json(*e, h != req.query.end() && h->second == "true"));
  }
  if (is({"api", "track", "nearby"})) {
    const geo::GeoPoint center(parse_double(query_field(req, "lat"), "lat"),
                               parse_double(query_field(req, "lon"), "lon"));
    const double radius = parse_double(query_field(req, "radius"), "radius");
    const View v = view();
    json hits = json::array();
    for (const auto& h : v.positions->query_nearby(center, radius, kind_filter(req))) {
      hits.push_back({{"entity_id", h.entity_id}, {"kind", tracker::to_string(h.kind)},
                      {"distance_m", h.distance_m}});
    }
    return ok({{"hits", std::move(hits)}});
  }
  if (is({"api", "track", "bbox"})) {
    const tracker::BoundingBox box{parse_double(query_field(req, "min_lat"), "min_lat"),
                                   parse_double(query_field(req, "min_lon"), "min_lon"),
                                   parse_double(query_field(req, "max_lat"), "max_lat"),
                                   parse_double(query_field(req, "max_lon"), "max_lon")};
    const View v = view();
    json out = json::array();
    for (const auto* e : v.positions->query_bbox(box, kind_filter(req))) out.push_back(tracker::to_json(*e, false));
    return ok({{"entities", std::move(out)}});
  }

  // --- game -----------------------------------------------------------
  if (is({"api", "game", "map"})) {
    json pushed;
    if (location) pushed = execute(PushLocation{me, *location});
    const View v = view();
    const auto* self = v.positions->find(me);
    if (!self || !self->last_fix) throw Error(ErrorCode::NoFix, "no known position; send a location");
    const geo::GeoPoint center = self->last_fix->point;
    const double radius = v.game->params.visibility_radius_m;
    json entities = json::array();
    for (const auto& h : v.positions->query_nearby(center, radius)) {
      if (h.entity_id == me) continue;
      entities.push_back(entity_summary(*v.game, *v.positions->find(h.entity_id), h.distance_m));
    }
    json out{{"center", {{"lat", center.lat_deg()}, {"lon", center.lon_deg()}}},
             {"radius_m", radius},
             {"entities", std::move(entities)}};
    if (!pushed.is_null()) out["events"] = pushed["events"];
    return ok(std::move(out));
  }
  if (is({"api", "game", "quests"})) {
    const View v = view();
    json quests = json::array();
    for (const auto& [qid, q] : v.game->players.at(me).quests) quests.push_back(quest_entry(*v.game, q));
    return ok({{"quests", std::move(quests)}});
  }
  if (is({"api", "game", "player"})) {
    const View v = view();
    const Player& p = v.game->players.at(me);
    json out{{"player_id", p.player_id}, {"display_name", p.display_name},
             {"inventory", inventory_of(*v.game, p)}, {"dialog", nullptr}, {"last_fix", nullptr}};
    if (p.dialog) out["dialog"] = {{"npc_id", p.dialog->npc_id}, {"node_id", p.dialog->node_id}};
    if (const auto* e = v.positions->find(me); e && e->last_fix) out["last_fix"] = tracker::to_json(*e->last_fix);
    return ok(std::move(out));
  }
  if (is({"api", "game", "npc", "*", "dialog"})) {
    return ok(execute(OpenDialog{me, std::string(seg[3]), location}));
  }
  if (is({"api", "game", "npc", "*", "choose"})) {
    const auto choice = body.find("choice");
    if (choice == body.end() || !choice->is_number_integer() || choice->get<std::int64_t>() < 0) bad_request("choice must be a non-negative integer");
    return ok(execute(Choose{me, std::string(seg[3]), str_field(body, "node"),
                             choice->get<std::size_t>(), location}));
  }
  if (is({"api", "game", "quest", "*", "accept"})) {
    return ok(execute(AcceptQuest{me, std::string(seg[3]), location}));
  }
  if (is({"api", "game", "quest", "*", "collect"})) {
    // Collect "for a quest": the nearest world item of the quest's kind, or
    // the one named in item_id.
    const LocationFix& fix = need_location();
    std::string item_id;
    if (body.contains("item_id")) {
      item_id = str_field(body, "item_id");
    } else {
      const View v = view();
      const auto spec = v.game->quest_specs.find(std::string(seg[3]));
      if (spec == v.game->quest_specs.end()) throw Error(ErrorCode::UnknownQuest, "unknown quest " + std::string(seg[3]));
      const auto* col = std::get_if<Collect>(&spec->second.kind);
      if (!col) bad_request("quest " + spec->first + " is not a collect quest");
      for (const auto& h : v.positions->query_nearby(fix.point, v.game->params.collect_radius_m,
                                                     {tracker::EntityKind::item})) {
        if (v.game->items.at(h.entity_id).kind == col->item_kind) {
          item_id = h.entity_id;
          break;
        }
      }
      if (item_id.empty()) {
        throw Error(ErrorCode::OutOfRange, "no " + col->item_kind + " within reach",
                    {{"radius_m", v.game->params.collect_radius_m}});
      }
    }
    json out = execute(CollectItem{me, item_id, fix});
    out["item_id"] = item_id;
    return ok(std::move(out));
  }
  if (is({"api", "game", "item", "*", "collect"})) {
    return ok(execute(CollectItem{me, std::string(seg[3]), need_location()}));
  }
  if (is({"api", "game", "item", "*", "drop"})) {
    std::optional<geo::GeoPoint> at;
    if (const auto it = body.find("at"); it != body.end() && !it->is_null()) {
      if (!it->is_object()) bad_request("at must be an object");
      at = geo::GeoPoint(num_field(*it, "lat"), num_field(*it, "lon"));
    } else if (location) {
      at = location->point;
    } else {
      bad_request("drop needs at or location");
    }
    return ok(execute(DropItem{me, std::string(seg[3]), *at, location}));
  }
  if (is({"api", "game", "item", "*", "give"})) {
    return ok(execute(GiveItem{me, str_field(body, "to"), std::string(seg[3]), location}));
  }
  if (is({"api", "game", "rebus", "*", "fragment"})) {
    const View v = view();
    const std::string qid(seg[3]);
    const auto spec = v.game->quest_specs.find(qid);
    if (spec == v.game->quest_specs.end()) throw Error(ErrorCode::UnknownQuest, "unknown quest " + qid);
    const auto* rebus = std::get_if<Rebus>(&spec->second.kind);
    if (!rebus) throw Error(ErrorCode::NotRebus, "quest " + qid + " is not a rebus");
    const Player& p = v.game->players.at(me);
    const auto q = p.quests.find(qid);
    if (q == p.quests.end() || !q->second.assigned_fragment_index) {
      throw Error(ErrorCode::NoFragment, "no fragment of " + qid + " has been given to you");
    }
    for (const auto& f : rebus->fragments) {
      if (f.fragment_index == *q->second.assigned_fragment_index) {
        json out = engine::to_json(f);
        out["quest_id"] = qid;
        out["fragment_count"] = rebus->fragments.size();
        return ok(std::move(out));
      }
    }
    throw Error(ErrorCode::NoFragment, "fragment vanished from quest " + qid);
  }
  if (is({"api", "game", "rebus", "*", "answer"})) {
    std::vector<PlayerId> participants;
    if (const auto it = body.find("participants"); it != body.end() && !it->is_null()) {
      if (!it->is_array()) bad_request("participants must be an array");
      for (const auto& p : *it) {
        if (!p.is_string()) bad_request("participants must be player ids");
        participants.push_back(p.get<std::string>());
      }
    }
    return ok(execute(SubmitRebus{me, std::string(seg[3]), participants, str_field(body, "phrase"), location}));
  }
  throw Error(ErrorCode::NoRoute, "no endpoint " + req.method + " " + req.path);
}

}  // namespace mep::server
