// mep-server: serves one game definition over HTTP.
#include <csignal>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "mep/server/http_frontend.hpp"

int main(int argc, char** argv) {
  CLI::App cli{"Mobile experience platform game server"};
  std::string game_dir;
  std::string listen = "127.0.0.1:8080";
  std::string journal;
  std::size_t snapshot_every = 1000;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> manual_clock;
  std::string static_dir;
  bool no_fsync = false;
  cli.add_option("--game-dir", game_dir, "Directory holding game.xml, npcs.xml, items.xml, quests.xml")
      ->required()
      ->check(CLI::ExistingDirectory);
  cli.add_option("--listen", listen, "Address to listen on, host:port")->capture_default_str();
  cli.add_option("--journal", journal, "JSONL journal; replayed on start, appended per command");
  cli.add_option("--snapshot-every", snapshot_every, "Snapshot after every N journal records (0: never)")
      ->capture_default_str();
  cli.add_option("--seed", seed, "Seed for the session token RNG (tests only)");
  cli.add_option("--manual-clock", manual_clock,
                 "Run on a settable clock starting at this epoch millisecond (enables /api/admin/clock)");
  cli.add_option("--static-dir", static_dir, "Also serve files from this directory at /")
      ->check(CLI::ExistingDirectory);
  cli.add_flag("--no-fsync", no_fsync, "Do not fdatasync after each journal append");
  CLI11_PARSE(cli, argc, argv);

  // Signals are taken by a dedicated thread so shutdown runs outside a
  // signal handler.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  try {
    auto def = mep::gamedef::load_valid_definition(game_dir);
    mep::SystemClock system_clock;
    std::optional<mep::ManualClock> manual;
    if (manual_clock) manual.emplace(*manual_clock);
    const mep::Clock& clock = manual ? static_cast<const mep::Clock&>(*manual) : system_clock;

    mep::server::AppOptions options;
    if (!journal.empty()) options.journal = journal;
    options.snapshot_every = snapshot_every;
    options.durable = !no_fsync;
    options.seed = seed;
    mep::server::App app(std::move(def), clock, options, manual ? &*manual : nullptr);

    mep::server::HttpFrontend http(
        app, static_dir.empty() ? std::nullopt : std::optional<std::filesystem::path>(static_dir));
    const auto [host, port] = mep::server::parse_listen_address(listen);
    const int bound = http.bind(host, port);
    std::cout << "listening on " << host << ":" << bound << " (game " << app.definition().game_id
              << ", seq " << app.last_seq() << ")" << std::endl;

    std::thread waiter([&] {
      int sig = 0;
      sigwait(&signals, &sig);
      http.stop();
    });
    http.serve();
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
  } catch (const mep::Error& e) {
    std::cerr << "mep-server: " << mep::wire_name(e.code()) << ": " << e.what() << '\n';
    if (!e.details().is_null()) std::cerr << e.details().dump(2) << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "mep-server: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
