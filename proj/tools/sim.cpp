// sim: runs scripted bots against a game server.
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mep/sim/harness.hpp"

namespace {

void print_summary(const mep::sim::SimReport& r) {
  std::cout << r.scenario << ": " << (r.ok ? "ok" : "FAILED") << ", " << r.rounds << " rounds, "
            << r.simulated_s << " s simulated, " << r.wall_s << " s wall, digest " << r.final_digest
            << '\n';
  for (const auto& b : r.bots) {
    long failed = 0;
    for (const auto& a : b.assertions) failed += !a.ok;
    std::cout << "  " << b.player_id << ": " << b.distance_m << " m, " << b.commands << " commands, "
              << b.consent_rejections << " consent rejections, " << b.completions.size()
              << " completions, " << b.assertions.size() - failed << "/" << b.assertions.size()
              << " assertions";
    if (b.error) std::cout << ", " << *b.error << " at step " << *b.error_step;
    std::cout << '\n';
    for (const auto& a : b.assertions) {
      if (!a.ok) std::cout << "    step " << a.step << ": " << a.message << '\n';
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Scripted-bot simulator"};
  cli.require_subcommand(1);

  std::string scenario_path, game_dir, server_url, report_path, journal;
  bool in_process = false, perturb = false;
  std::optional<std::uint64_t> seed;

  auto* run = cli.add_subcommand("run", "Run a scenario; exit 0 iff every assertion passes");
  run->add_option("scenario", scenario_path, "Scenario file (.json or .xml)")->required()->check(CLI::ExistingFile);
  run->add_option("--game-dir", game_dir, "Game definition directory")->required()->check(CLI::ExistingDirectory);
  auto* server_opt = run->add_option("--server", server_url, "Drive a running server (started with --manual-clock)");
  run->add_flag("--in-process", in_process, "Call the server core directly instead of over HTTP")->excludes(server_opt);
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--report", report_path, "Write the JSON report here");
  run->add_option("--journal", journal, "Journal for the embedded server");

  auto* check = cli.add_subcommand("replay-check", "Run twice and replay the journal; exit 0 iff identical");
  check->add_option("scenario", scenario_path, "Scenario file (.json or .xml)")->required()->check(CLI::ExistingFile);
  check->add_option("--game-dir", game_dir, "Game definition directory")->required()->check(CLI::ExistingDirectory);
  check->add_flag("--in-process", in_process, "Call the server core directly instead of over HTTP");
  check->add_option("--seed", seed, "Override the scenario seed");
  check->add_flag("--perturb", perturb, "Reverse the bot order in the first round of the second run");

  CLI11_PARSE(cli, argc, argv);

  try {
    const auto scenario = mep::sim::load_scenario(scenario_path);
    const auto def = mep::gamedef::load_valid_definition(game_dir);
    mep::sim::SimOptions options;
    options.mode = in_process ? mep::sim::Mode::in_process : mep::sim::Mode::embedded_http;
    if (!server_url.empty()) {
      options.mode = mep::sim::Mode::remote;
      options.server_url = server_url;
    }
    options.seed = seed;
    if (!journal.empty()) options.journal = journal;

    if (*check) {
      const auto r = mep::sim::replay_check(scenario, def, options, perturb);
      std::cout << (r.ok ? "identical: " : "DIVERGED: ") << r.summary << '\n';
      return r.ok ? 0 : 1;
    }
    const auto report = mep::sim::run_scenario(scenario, def, options);
    print_summary(report);
    if (!report_path.empty()) {
      std::ofstream out(report_path);
      out << mep::sim::to_json(report).dump(2) << '\n';
    }
    return report.ok ? 0 : 1;
  } catch (const mep::Error& e) {
    std::cerr << "sim: " << mep::wire_name(e.code()) << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "sim: " << e.what() << '\n';
    return 2;
  }
}
