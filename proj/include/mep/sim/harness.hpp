#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mep/gamedef/gamedef.hpp"
#include "mep/sim/scenario.hpp"
#include "mep/sim/transport.hpp"

namespace mep::sim {

struct AssertionResult {
  std::size_t step = 0;
  bool ok = false;
  std::string message;
};

struct Completion {
  std::string quest_id;
  std::int64_t timestamp_ms = 0;
};

struct BotReport {
  std::string player_id;
  double distance_m = 0.0;        // sum of per-tick haversine steps
  double track_progress_m = 0.0;  // arc length reached along the track
  long commands = 0;              // state-changing requests sent
  long requests = 0;              // every request sent
  long consent_rejections = 0;    // 403 CONSENT_REQUIRED answers
  long location_accepted = 0;     // location-bearing requests answered 200
  std::vector<Completion> completions;
  std::vector<AssertionResult> assertions;
  bool finished = false;
  std::optional<std::string> error;  // wire name, e.g. SCRIPT_STUCK
  std::optional<std::size_t> error_step;
};

struct SimReport {
  std::string scenario;
  std::uint64_t seed = 0;
  bool ok = false;
  long rounds = 0;
  double simulated_s = 0.0;
  double wall_s = 0.0;
  std::string final_digest;  // as reported by the server
  std::uint64_t last_seq = 0;
  std::vector<BotReport> bots;
};

nlohmann::json to_json(const SimReport& r);
// Hash of the report without its wall-clock time: equal for equal runs.
std::string report_digest(const SimReport& r);

enum class Mode { embedded_http, in_process, remote };

struct SimOptions {
  Mode mode = Mode::embedded_http;
  std::string server_url;                      // remote
  std::optional<std::uint64_t> seed;           // overrides the scenario's
  std::optional<std::filesystem::path> journal;  // embedded / in-process server
  // Fault injection: reverse the bot order in this scheduling round.
  std::optional<long> perturb_round;
};

// Drives the bots round by round against `transport`. Deterministic: the
// same scenario against the same fresh world gives the same report.
SimReport run_bots(const Scenario& scenario, Transport& transport,
                   std::optional<long> perturb_round = std::nullopt);

// Validates the scenario, starts the server side the options ask for and
// runs it.
SimReport run_scenario(const Scenario& scenario, const gamedef::GameDefinition& def,
                       const SimOptions& options = {});

struct ReplayCheckResult {
  bool ok = false;
  std::string summary;
  std::optional<std::uint64_t> first_divergent_seq;
};

// Runs the scenario twice with journals (the second time with the bot order
// reversed in round 0 when `perturb`), then compares report digests and
// journals, and replays the first journal onto a fresh world.
ReplayCheckResult replay_check(const Scenario& scenario, const gamedef::GameDefinition& def,
                               SimOptions options = {}, bool perturb = false);

}  // namespace mep::sim
