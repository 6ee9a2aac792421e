#pragma once

#include <string>
#include <string_view>

namespace mep::engine {

// Canonical form used to compare rebus answers: Unicode NFC, lowercase,
// punctuation removed (no space inserted), whitespace runs collapsed to one
// space, trimmed. Input is UTF-8; invalid sequences are replaced.
//   "  Kamo   River! " -> "kamo river"
//   "RE-BUS"           -> "rebus"
std::string normalize_phrase(std::string_view text);

}  // namespace mep::engine
