#include "mep/sim/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "mep/engine/serialize.hpp"
#include "mep/error.hpp"
#include "mep/server/http_frontend.hpp"

namespace mep::sim {

using nlohmann::json;
namespace fs = std::filesystem;

json to_json(const SimReport& r) {
  json bots = json::array();
  for (const auto& b : r.bots) {
    json completions = json::array();
    for (const auto& c : b.completions) {
      completions.push_back({{"quest_id", c.quest_id}, {"timestamp_ms", c.timestamp_ms}});
    }
    json assertions = json::array();
    for (const auto& a : b.assertions) {
      assertions.push_back({{"step", a.step}, {"ok", a.ok}, {"message", a.message}});
    }
    bots.push_back({{"player_id", b.player_id},
                    {"distance_m", b.distance_m},
                    {"track_progress_m", b.track_progress_m},
                    {"commands", b.commands},
                    {"requests", b.requests},
                    {"consent_rejections", b.consent_rejections},
                    {"location_accepted", b.location_accepted},
                    {"completions", std::move(completions)},
                    {"assertions", std::move(assertions)},
                    {"finished", b.finished},
                    {"error", b.error ? json(*b.error) : json(nullptr)},
                    {"error_step", b.error_step ? json(*b.error_step) : json(nullptr)}});
  }
  return json{{"scenario", r.scenario},   {"seed", r.seed},
              {"ok", r.ok},               {"rounds", r.rounds},
              {"simulated_s", r.simulated_s}, {"wall_s", r.wall_s},
              {"final_digest", r.final_digest}, {"last_seq", r.last_seq},
              {"bots", std::move(bots)}};
}

std::string report_digest(const SimReport& r) {
  json j = to_json(r);
  j.erase("wall_s");
  return engine::sha256_hex(j.dump());
}

namespace {

std::string error_code_of(const server::Response& r) {
  if (r.body.is_object() && r.body.contains("error")) return r.body["error"].value("code", "");
  return {};
}

class Bot {
 public:
  Bot(const BotSpec& spec, Transport& t, std::int64_t start_ms, long stuck_ticks, double collect_radius)
      : spec_(spec),
        t_(t),
        pos_(spec.track.front()),
        next_due_(start_ms),
        tick_ms_(std::llround(spec.tick_s * 1000.0)),
        stuck_ticks_(stuck_ticks),
        collect_radius_(collect_radius) {
    if (spec.track.size() > 1) track_.emplace(spec.track);
    report_.player_id = spec.player_id;
    if (tick_ms_ <= 0) tick_ms_ = 1;
  }

  bool done() const { return done_; }
  std::int64_t next_due() const { return next_due_; }
  BotReport& report() { return report_; }

  void step(std::int64_t now, std::vector<Bot>& all) {
    next_due_ += tick_ms_;
    if (done_) return;
    if (token_.empty() && !login()) return;
    if (pc_ >= spec_.script.size()) return finish();
    const Action& a = spec_.script[pc_];
    bool progressed = false;

    const double target = a.kind == Action::Kind::walk_to_distance && track_
                              ? std::min(a.distance_m, track_->length_m())
                              : 0.0;
    if (a.kind == Action::Kind::walk_to_distance && track_ && progress_ < target) {
      const double next = std::min(progress_ + spec_.speed_mps * spec_.tick_s, target);
      const geo::GeoPoint p = geo::point_at_distance(*track_, next);
      report_.distance_m += geo::haversine_distance(pos_, p);
      pos_ = p;
      progress_ = next;
      report_.track_progress_m = progress_;
      progressed = true;
    }
    now_ = now;
    push_fix(all);

    switch (a.kind) {
      case Action::Kind::walk_to_distance:
        if (!a.collect_kind.empty()) collect_visible(a.collect_kind, false, all);
        if (!track_ || progress_ >= target) progressed = advance();
        break;
      case Action::Kind::talk:
        if (talk(a, all)) progressed = advance();
        break;
      case Action::Kind::accept: {
        const auto r = command("POST", "/api/game/quest/" + a.quest_id + "/accept", json::object(), all);
        if (r.status == 200) progressed = advance();
        break;
      }
      case Action::Kind::collect_nearest:
        if (collect_visible(a.item_kind, true, all) > 0) progressed = advance();
        break;
      case Action::Kind::submit_rebus: {
        const auto r = command("POST", "/api/game/rebus/" + a.quest_id + "/answer",
                               {{"phrase", a.phrase}, {"participants", a.participants}}, all);
        const std::string outcome = r.status == 200 ? "accepted" : error_code_of(r);
        assertion(outcome == a.expect_outcome, "rebus " + a.quest_id + " with " +
                                                    json(a.participants).dump() + ": expected " +
                                                    a.expect_outcome + ", got " + outcome);
        progressed = advance();
        break;
      }
      case Action::Kind::expect: {
        std::string detail;
        const bool ok = holds(a.predicate, detail);
        assertion(ok, detail);
        progressed = advance();
        break;
      }
      case Action::Kind::wait:
        if (++waited_ >= a.ticks) {
          waited_ = 0;
          advance();
        }
        progressed = true;
        break;
      case Action::Kind::wait_for: {
        std::string detail;
        if (holds(a.predicate, detail)) progressed = advance();
        break;
      }
    }

    if (progressed) {
      idle_ = 0;
    } else if (++idle_ >= stuck_ticks_) {
      report_.error = wire_name(ErrorCode::ScriptStuck);
      report_.error_step = pc_;
      done_ = true;
      return;
    }
    if (pc_ >= spec_.script.size()) finish();
  }

  void give_up(ErrorCode why) {
    if (done_) return;
    report_.error = wire_name(why);
    report_.error_step = pc_;
    done_ = true;
  }

  void record_events(const json& body, std::vector<Bot>& all) {
    if (!body.is_object() || !body.contains("events")) return;
    for (const auto& e : body["events"]) {
      if (e.value("state", "") != "completed") continue;
      for (auto& b : all) {
        if (b.spec_.player_id != e.value("player_id", "")) continue;
        auto& list = b.report_.completions;
        const std::string q = e.value("quest_id", "");
        if (std::none_of(list.begin(), list.end(), [&](const Completion& c) { return c.quest_id == q; })) {
          list.push_back({q, e.value("timestamp_ms", std::int64_t{0})});
        }
      }
    }
  }

 private:
  bool advance() {
    ++pc_;
    return true;
  }

  // A failed assertion is recorded, marks the bot failed at its first such
  // step, and the script carries on.
  void assertion(bool ok, const std::string& detail) {
    report_.assertions.push_back({pc_, ok, detail});
    if (!ok && !report_.error) {
      report_.error = wire_name(ErrorCode::AssertionFailed);
      report_.error_step = pc_;
    }
  }

  void finish() {
    report_.finished = true;
    done_ = true;
  }

  json location() const {
    return {{"lat", pos_.lat_deg()}, {"lon", pos_.lon_deg()}, {"timestamp_ms", now_}, {"consent", spec_.consent}};
  }

  server::Response send(const std::string& method, const std::string& path, const json& body,
                        std::map<std::string, std::string> query = {}) {
    ++report_.requests;
    return t_.send({method, path, std::move(query), body.is_null() ? "" : body.dump(), token_});
  }

  server::Response command(const std::string& method, const std::string& path, const json& body,
                           std::vector<Bot>& all) {
    ++report_.commands;
    auto r = send(method, path, body);
    if (r.status == 403 && error_code_of(r) == "CONSENT_REQUIRED") ++report_.consent_rejections;
    if (r.status == 200) record_events(r.body, all);
    return r;
  }

  bool login() {
    ++report_.commands;
    const auto r = send("POST", "/api/session",
                        {{"player_id", spec_.player_id}, {"display_name", spec_.display_name}});
    if (r.status != 200) {
      report_.error = error_code_of(r).empty() ? "LOGIN_FAILED" : error_code_of(r);
      report_.error_step = 0;
      done_ = true;
      return false;
    }
    token_ = r.body["token"].get<std::string>();
    return true;
  }

  void push_fix(std::vector<Bot>& all) {
    const auto r = command("POST", "/api/track/update", {{"location", location()}}, all);
    if (r.status == 200) ++report_.location_accepted;
  }

  // Picks up items of `kind` within reach, as seen on the map; returns how
  // many were collected.
  int collect_visible(const std::string& kind, bool nearest_only, std::vector<Bot>& all) {
    const auto map = send("GET", "/api/game/map", nullptr);
    if (map.status != 200) return 0;
    int collected = 0;
    for (const auto& e : map.body["entities"]) {
      if (e["kind"] != "item") continue;
      if (kind != "*" && e.value("item_kind", "") != kind) continue;
      if (e["distance_m"].get<double>() > collect_radius_) continue;
      const auto r = command("POST", "/api/game/item/" + e["entity_id"].get<std::string>() + "/collect",
                             {{"location", location()}}, all);
      if (r.status == 200) {
        ++report_.location_accepted;
        ++collected;
        if (nearest_only) break;
      }
    }
    return collected;
  }

  bool talk(const Action& a, std::vector<Bot>& all) {
    auto r = command("GET", "/api/game/npc/" + a.npc_id + "/dialog", nullptr, all);
    if (r.status != 200) return false;
    json node = r.body["node"];
    for (const std::size_t c : a.choices) {
      if (node.is_null()) return false;
      r = command("POST", "/api/game/npc/" + a.npc_id + "/choose",
                  {{"node", node["node_id"]}, {"choice", c}}, all);
      if (r.status != 200) return false;
      node = r.body["node"];
    }
    return true;
  }

  bool holds(const Predicate& p, std::string& detail) {
    switch (p.kind) {
      case Predicate::Kind::quest_state: {
        const auto r = send("GET", "/api/game/quests", nullptr);
        std::string state = "none";
        if (r.status == 200) {
          for (const auto& q : r.body["quests"]) {
            if (q["quest_id"] == p.quest_id) state = q["state"].get<std::string>();
          }
        }
        detail = "quest " + p.quest_id + " is " + state + ", expected " + p.state;
        return state == p.state;
      }
      case Predicate::Kind::inventory_count: {
        const auto r = send("GET", "/api/game/player", nullptr);
        long n = 0;
        if (r.status == 200) {
          for (const auto& i : r.body["inventory"]) n += p.item_kind == "*" || i["kind"] == p.item_kind;
        }
        detail = "holds " + std::to_string(n) + " " + p.item_kind + ", expected " + std::to_string(p.count);
        return n == p.count;
      }
      case Predicate::Kind::has_fragment: {
        const auto r = send("GET", "/api/game/rebus/" + p.quest_id + "/fragment", nullptr);
        detail = "fragment of " + p.quest_id + (r.status == 200 ? " held" : " missing");
        return r.status == 200;
      }
      case Predicate::Kind::consent_rejections_at_least:
        detail = std::to_string(report_.consent_rejections) + " consent rejections, expected at least " +
                 std::to_string(p.count);
        return report_.consent_rejections >= p.count;
    }
    return false;
  }

  const BotSpec& spec_;
  Transport& t_;
  std::optional<geo::Track> track_;
  geo::GeoPoint pos_;
  double progress_ = 0.0;
  std::int64_t next_due_;
  std::int64_t tick_ms_;
  std::int64_t now_ = 0;
  long stuck_ticks_;
  double collect_radius_;
  std::string token_;
  std::size_t pc_ = 0;
  long idle_ = 0;
  long waited_ = 0;
  bool done_ = false;
  BotReport report_;
};

// Scratch directory for replay_check journals.
class ScratchDir {
 public:
  ScratchDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("mep-sim-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

}  // namespace

SimReport run_bots(const Scenario& scenario, Transport& transport, std::optional<long> perturb_round) {
  transport.set_time(scenario.start_ms);
  const auto info = transport.send({"GET", "/api/game/info", {}, "", ""});
  if (info.status != 200) throw Error(ErrorCode::InvalidArgument, "server did not describe its game");
  const double collect_radius = info.body["params"]["collect_radius_m"].get<double>();

  std::vector<Bot> bots;
  bots.reserve(scenario.bots.size());
  for (const auto& spec : scenario.bots) {
    bots.emplace_back(spec, transport, scenario.start_ms, scenario.stuck_ticks, collect_radius);
  }

  SimReport report;
  report.scenario = scenario.name;
  report.seed = scenario.seed;
  std::int64_t now = scenario.start_ms;
  std::int64_t last_active = now;
  long round = 0;
  auto active = [&] { return std::any_of(bots.begin(), bots.end(), [](const Bot& b) { return !b.done(); }); };
  while (active() && round < scenario.max_rounds) {
    transport.set_time(now);
    std::vector<Bot*> due;
    for (auto& b : bots) {
      if (!b.done() && b.next_due() <= now) due.push_back(&b);
    }
    if (perturb_round && *perturb_round == round) std::reverse(due.begin(), due.end());
    for (Bot* b : due) b->step(now, bots);
    last_active = now;
    ++round;
    std::int64_t next = INT64_MAX;
    for (const auto& b : bots) {
      if (!b.done()) next = std::min(next, b.next_due());
    }
    if (next == INT64_MAX) break;
    now = next;
  }
  for (auto& b : bots) b.give_up(ErrorCode::ScriptStuck);

  const auto digest = transport.send({"GET", "/api/state/digest", {}, "", ""});
  report.final_digest = digest.body.value("state_digest", "");
  report.last_seq = digest.body.value("seq", std::uint64_t{0});
  report.rounds = round;
  report.simulated_s = static_cast<double>(last_active - scenario.start_ms) / 1000.0;
  report.ok = true;
  for (auto& b : bots) {
    BotReport& br = b.report();
    report.ok = report.ok && br.finished && !br.error;
    for (const auto& a : br.assertions) report.ok = report.ok && a.ok;
    report.bots.push_back(std::move(br));
  }
  return report;
}

SimReport run_scenario(const Scenario& scenario_in, const gamedef::GameDefinition& def,
                       const SimOptions& options) {
  Scenario scenario = scenario_in;
  if (options.seed) scenario.seed = *options.seed;
  check_scenario(scenario, def);

  const auto t0 = std::chrono::steady_clock::now();
  SimReport report;
  if (options.mode == Mode::remote) {
    HttpTransport transport(options.server_url);
    report = run_bots(scenario, transport, options.perturb_round);
  } else {
    ManualClock clock(scenario.start_ms);
    server::AppOptions app_options;
    app_options.journal = options.journal;
    app_options.durable = false;
    app_options.seed = scenario.seed;
    server::App app(def, clock, app_options, &clock);
    if (options.mode == Mode::in_process) {
      InProcessTransport transport(app, clock);
      report = run_bots(scenario, transport, options.perturb_round);
    } else {
      server::HttpFrontend http(app);
      const int port = http.bind("127.0.0.1", 0);
      http.start();
      {
        HttpTransport transport("http://127.0.0.1:" + std::to_string(port), &clock);
        report = run_bots(scenario, transport, options.perturb_round);
      }  // close the keep-alive connection first, or stop() waits out its timeout
      http.stop();
    }
  }
  report.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

ReplayCheckResult replay_check(const Scenario& scenario, const gamedef::GameDefinition& def,
                               SimOptions options, bool perturb) {
  if (options.mode == Mode::remote) {
    throw Error(ErrorCode::InvalidArgument, "replay_check needs a server it starts itself");
  }
  ScratchDir dir;
  SimOptions first = options;
  first.journal = dir.path() / "first.jsonl";
  first.perturb_round.reset();
  SimOptions second = options;
  second.journal = dir.path() / "second.jsonl";
  second.perturb_round = perturb ? std::optional<long>(0) : std::nullopt;

  const SimReport a = run_scenario(scenario, def, first);
  const SimReport b = run_scenario(scenario, def, second);
  const auto ja = server::read_journal(*first.journal).records;
  const auto jb = server::read_journal(*second.journal).records;

  ReplayCheckResult out;
  for (std::size_t i = 0; i < std::max(ja.size(), jb.size()); ++i) {
    const bool same = i < ja.size() && i < jb.size() && ja[i].command == jb[i].command &&
                      ja[i].digest == jb[i].digest && ja[i].timestamp_ms == jb[i].timestamp_ms;
    if (!same) {
      out.first_divergent_seq = i + 1;
      break;
    }
  }
  const bool reports_equal = report_digest(a) == report_digest(b);
  const std::string replayed = server::replay(*first.journal, def, false).digest;
  const bool replay_equal = replayed == a.final_digest;

  out.ok = reports_equal && replay_equal && !out.first_divergent_seq;
  out.summary = "reports " + std::string(reports_equal ? "identical" : "differ") + "; journals " +
                (out.first_divergent_seq ? "diverge at seq " + std::to_string(*out.first_divergent_seq)
                                         : "identical (" + std::to_string(ja.size()) + " records)") +
                "; replay " + (replay_equal ? "matches" : "does not match") + " the live digest";
  return out;
}

}  // namespace mep::sim
