// mep-validate: integrity check of a game definition directory.
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mep/gamedef/gamedef.hpp"

int main(int argc, char** argv) {
  CLI::App cli{"Check a game definition; exit 0 when valid, 1 with integrity errors, 2 when unreadable"};
  std::string game_dir;
  bool as_json = false;
  cli.add_option("game-dir", game_dir, "Directory holding the game XML documents")
      ->required()
      ->check(CLI::ExistingDirectory);
  cli.add_flag("--json", as_json, "Print errors as JSON");
  CLI11_PARSE(cli, argc, argv);

  try {
    const auto def = mep::gamedef::parse_game_xml(mep::gamedef::load_game_dir(game_dir));
    const auto errors = mep::gamedef::validate(def);
    if (as_json) {
      std::cout << mep::gamedef::to_json(errors).dump(2) << '\n';
    } else if (errors.empty()) {
      std::cout << def.game_id << ": ok (" << def.npcs.size() << " npcs, " << def.quests.size()
                << " quests)\n";
    } else {
      for (const auto& e : errors) {
        std::cout << e.path << ": " << mep::gamedef::to_string(e.code) << ": " << e.message << '\n';
      }
    }
    return errors.empty() ? 0 : 1;
  } catch (const mep::Error& e) {
    std::cerr << "mep-validate: " << mep::wire_name(e.code()) << ": " << e.what() << '\n';
    if (!e.details().is_null()) std::cerr << e.details().dump() << '\n';
    return 2;
  }
}
