#include "mep/error.hpp"

#include <cctype>

namespace mep {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidCoordinate: return "InvalidCoordinate";
    case ErrorCode::DuplicateEntity: return "DuplicateEntity";
    case ErrorCode::UnknownEntity: return "UnknownEntity";
    case ErrorCode::ConsentRequired: return "ConsentRequired";
    case ErrorCode::StaleTimestamp: return "StaleTimestamp";
    case ErrorCode::DuplicatePlayer: return "DuplicatePlayer";
    case ErrorCode::UnknownPlayer: return "UnknownPlayer";
    case ErrorCode::UnknownNpc: return "UnknownNpc";
    case ErrorCode::UnknownQuest: return "UnknownQuest";
    case ErrorCode::UnknownItem: return "UnknownItem";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::NoFix: return "NoFix";
    case ErrorCode::StaleFix: return "StaleFix";
    case ErrorCode::WrongNode: return "WrongNode";
    case ErrorCode::BadChoice: return "BadChoice";
    case ErrorCode::NoFragmentsLeft: return "NoFragmentsLeft";
    case ErrorCode::NoFragment: return "NoFragment";
    case ErrorCode::QuestAlreadyCompleted: return "QuestAlreadyCompleted";
    case ErrorCode::NotOffered: return "NotOffered";
    case ErrorCode::AlreadyActive: return "AlreadyActive";
    case ErrorCode::AlreadyCompleted: return "AlreadyCompleted";
    case ErrorCode::NotInWorld: return "NotInWorld";
    case ErrorCode::NotHeld: return "NotHeld";
    case ErrorCode::NotRebus: return "NotRebus";
    case ErrorCode::WrongPhrase: return "WrongPhrase";
    case ErrorCode::IncompleteCoverage: return "IncompleteCoverage";
    case ErrorCode::TooFewPlayers: return "TooFewPlayers";
    case ErrorCode::QuestInactive: return "QuestInactive";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingDocument: return "MissingDocument";
    case ErrorCode::InvalidDefinition: return "InvalidDefinition";
    case ErrorCode::Unauthorized: return "Unauthorized";
    case ErrorCode::SessionActive: return "SessionActive";
    case ErrorCode::NoRoute: return "NoRoute";
    case ErrorCode::JournalGap: return "JournalGap";
    case ErrorCode::CorruptRecord: return "CorruptRecord";
    case ErrorCode::DigestMismatch: return "DigestMismatch";
    case ErrorCode::StorageFailure: return "StorageFailure";
    case ErrorCode::AssertionFailed: return "AssertionFailed";
    case ErrorCode::ScriptStuck: return "ScriptStuck";
  }
  return "Unknown";
}

std::string wire_name(ErrorCode code) {
  const std::string_view camel = to_string(code);
  std::string out;
  out.reserve(camel.size() + 8);
  for (std::size_t i = 0; i < camel.size(); ++i) {
    const char c = camel[i];
    if (i > 0 && std::isupper(static_cast<unsigned char>(c))) out.push_back('_');
    out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  return out;
}

}  // namespace mep
