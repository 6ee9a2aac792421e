#pragma once

#include <set>
#include <string>
#include <vector>

#include "mep/gamedef/gamedef.hpp"
#include "oracle_data.hpp"

namespace mep::testing {

struct Mutation {
  std::string name, document, find, replace, expected_code;
};

struct MutationCorpus {
  gamedef::DocumentSet base;
  std::vector<Mutation> mutations;
  std::vector<std::string> combined;
};

inline MutationCorpus load_mutation_corpus() {
  const auto j = read_json(data_path("validator/mutations.json"));
  MutationCorpus c;
  c.base = gamedef::load_game_dir(data_path("validator/" + j.at("base").get<std::string>()));
  for (const auto& m : j.at("mutations")) {
    c.mutations.push_back({m.at("name"), m.at("document"), m.at("find"), m.at("replace"),
                           m.at("expected_code")});
  }
  c.combined = j.at("combined").get<std::vector<std::string>>();
  return c;
}

// Applies one textual mutation; throws if the anchor is not found exactly once.
inline void apply_mutation(gamedef::DocumentSet& docs, const Mutation& m) {
  std::string& text = docs.at(m.document);
  const auto pos = text.find(m.find);
  if (pos == std::string::npos || text.find(m.find, pos + 1) != std::string::npos) {
    throw std::runtime_error("mutation " + m.name + ": anchor must occur exactly once");
  }
  text.replace(pos, m.find.size(), m.replace);
}

inline std::set<std::string> codes_of(const std::vector<gamedef::IntegrityError>& errors) {
  std::set<std::string> out;
  for (const auto& e : errors) out.insert(std::string(gamedef::to_string(e.code)));
  return out;
}

}  // namespace mep::testing
