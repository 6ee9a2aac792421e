#include <array>
#include <cstdio>

#include <openssl/evp.h>

#include "mep/engine/serialize.hpp"
#include "mep/error.hpp"

namespace mep::engine {

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::InvalidArgument, "sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xf]);
  }
  return out;
}

std::string state_digest(const Engine& engine) {
  const auto snap = engine.tracker().snapshot();
  nlohmann::json positions = nlohmann::json::array();
  for (std::size_t i = 0; i < snap->size(); ++i) {
    positions.push_back(tracker::to_json(snap->at(i), false));
  }
  const nlohmann::json summary{{"game", to_json(engine.state())},
                               {"positions", std::move(positions)},
                               {"fixes_stored", snap->fixes_stored()}};
  return sha256_hex(summary.dump());
}

std::string full_digest(const Engine& engine) {
  const nlohmann::json all{{"game", to_json(engine.state())},
                           {"tracker", tracker::to_json(*engine.tracker().snapshot())}};
  return sha256_hex(all.dump());
}

}  // namespace mep::engine
