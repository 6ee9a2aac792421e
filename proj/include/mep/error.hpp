#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace mep {

// Every domain failure in the platform carries one of these codes. The server
// maps them onto HTTP statuses; the simulator and tests match on them.
enum class ErrorCode {
  InvalidArgument,
  InvalidCoordinate,
  // tracker
  DuplicateEntity,
  UnknownEntity,
  ConsentRequired,
  StaleTimestamp,
  // engine
  DuplicatePlayer,
  UnknownPlayer,
  UnknownNpc,
  UnknownQuest,
  UnknownItem,
  OutOfRange,
  NoFix,
  StaleFix,
  WrongNode,
  BadChoice,
  NoFragmentsLeft,
  NoFragment,
  QuestAlreadyCompleted,
  NotOffered,
  AlreadyActive,
  AlreadyCompleted,
  NotInWorld,
  NotHeld,
  NotRebus,
  WrongPhrase,
  IncompleteCoverage,
  TooFewPlayers,
  QuestInactive,
  // gamedef
  ParseError,
  MissingDocument,
  InvalidDefinition,
  // server / persistence
  Unauthorized,
  SessionActive,
  NoRoute,
  JournalGap,
  CorruptRecord,
  DigestMismatch,
  StorageFailure,
  // simulator
  AssertionFailed,
  ScriptStuck,
};

std::string_view to_string(ErrorCode code);

// Wire name, e.g. ConsentRequired -> "CONSENT_REQUIRED".
std::string wire_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, nlohmann::json details = nullptr)
      : std::runtime_error(message), code_(code), details_(std::move(details)) {}

  ErrorCode code() const noexcept { return code_; }
  const nlohmann::json& details() const noexcept { return details_; }

 private:
  ErrorCode code_;
  nlohmann::json details_;
};

}  // namespace mep
