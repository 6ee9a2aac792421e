#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mep/engine/engine.hpp"
#include "mep/gamedef/gamedef.hpp"

namespace mep::server {

// One accepted command. `digest` is engine::state_digest after the command.
struct JournalRecord {
  std::uint64_t seq = 0;
  std::int64_t timestamp_ms = 0;
  nlohmann::json command;
  std::string digest;
};

nlohmann::json to_json(const JournalRecord& r);
JournalRecord journal_record_from_json(const nlohmann::json& j);

struct JournalContents {
  std::vector<JournalRecord> records;
  // Byte length of the complete lines. Anything after it is an append that
  // was cut short by a crash; it was never acknowledged and is discarded.
  std::uintmax_t valid_bytes = 0;
  bool torn_tail = false;
};

// Reads a JSONL journal. A missing file is an empty journal. Throws
// CorruptRecord {line} for an unreadable complete line and JournalGap
// {expected, found} when seq does not run 1, 2, 3, ...
JournalContents read_journal(const std::filesystem::path& path);

// Append-only writer. Each record goes out in a single write(2) followed by
// fdatasync when `durable`, so once append() returns the record survives a
// process kill (and, with durable, a power cut).
class JournalWriter {
 public:
  JournalWriter(const std::filesystem::path& path, bool durable);
  ~JournalWriter();
  JournalWriter(const JournalWriter&) = delete;
  JournalWriter& operator=(const JournalWriter&) = delete;

  // Throws StorageFailure; a failed append leaves no partial line behind.
  void append(const JournalRecord& r);

  // Test hook: the next `n` appends fail as if the disk were full.
  void inject_failures(int n) { injected_failures_ = n; }

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  bool durable_;
  int fd_ = -1;
  int injected_failures_ = 0;
};

std::filesystem::path snapshot_path(const std::filesystem::path& journal);

// Writes {seq, digest, state:{game, tracker}} atomically (temp file + rename).
void write_snapshot(const std::filesystem::path& journal, std::uint64_t seq,
                    const engine::Engine& engine);

struct ReplayResult {
  std::unique_ptr<engine::Engine> engine;
  std::uint64_t last_seq = 0;
  std::string digest;
  std::uint64_t snapshot_seq = 0;  // 0 when replayed from the start
  bool torn_tail = false;
};

// Rebuilds the world from a journal: the latest usable snapshot plus the
// tail, or every record from a fresh instantiate(). Each record's digest is
// verified; the first divergence throws DigestMismatch {seq}. A snapshot that
// is unreadable or disagrees with the journal is ignored.
ReplayResult replay(const std::filesystem::path& journal, const gamedef::GameDefinition& def,
                    bool use_snapshot = true);

// Same, over records already in memory, starting from a fresh world.
ReplayResult replay_records(const std::vector<JournalRecord>& records,
                            const gamedef::GameDefinition& def);

}  // namespace mep::server
