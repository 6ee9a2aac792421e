#include "mep/server/journal.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mep/engine/command.hpp"
#include "mep/engine/serialize.hpp"
#include "mep/error.hpp"
#include "mep/tracker/tracker.hpp"

namespace mep::server {

using nlohmann::json;
namespace fs = std::filesystem;

json to_json(const JournalRecord& r) {
  return json{{"seq", r.seq}, {"timestamp_ms", r.timestamp_ms}, {"command", r.command},
              {"digest", r.digest}};
}

JournalRecord journal_record_from_json(const json& j) {
  JournalRecord r;
  r.seq = j.at("seq").get<std::uint64_t>();
  r.timestamp_ms = j.at("timestamp_ms").get<std::int64_t>();
  r.command = j.at("command");
  r.digest = j.at("digest").get<std::string>();
  if (!r.command.is_object()) throw std::runtime_error("command is not an object");
  return r;
}

JournalContents read_journal(const fs::path& path) {
  JournalContents out;
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    if (!fs::exists(path)) return out;
    throw Error(ErrorCode::StorageFailure, "cannot read journal " + path.string());
  }
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) {
      out.torn_tail = true;
      break;
    }
    ++line_no;
    const std::string_view line(text.data() + pos, nl - pos);
    JournalRecord r;
    try {
      r = journal_record_from_json(json::parse(line));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::CorruptRecord,
                  "journal line " + std::to_string(line_no) + " is unreadable: " + e.what(),
                  {{"line", line_no}});
    }
    const std::uint64_t expected = out.records.size() + 1;
    if (r.seq != expected) {
      throw Error(ErrorCode::JournalGap,
                  "journal expected seq " + std::to_string(expected) + " but found " +
                      std::to_string(r.seq),
                  {{"expected", expected}, {"found", r.seq}, {"line", line_no}});
    }
    out.records.push_back(std::move(r));
    pos = nl + 1;
    out.valid_bytes = pos;
  }
  return out;
}

JournalWriter::JournalWriter(const fs::path& path, bool durable) : path_(path), durable_(durable) {
  fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) {
    throw Error(ErrorCode::StorageFailure,
                "cannot open journal " + path.string() + ": " + std::strerror(errno));
  }
}

JournalWriter::~JournalWriter() {
  if (fd_ >= 0) ::close(fd_);
}

void JournalWriter::append(const JournalRecord& r) {
  if (injected_failures_ > 0) {
    --injected_failures_;
    throw Error(ErrorCode::StorageFailure, "journal append failed (injected)");
  }
  const std::string line = to_json(r).dump() + "\n";
  const off_t before = ::lseek(fd_, 0, SEEK_END);
  const ssize_t n = ::write(fd_, line.data(), line.size());
  if (n != static_cast<ssize_t>(line.size())) {
    const std::string why = n < 0 ? std::strerror(errno) : "short write";
    if (n > 0 && before >= 0 && ::ftruncate(fd_, before) != 0) {
      // the torn tail is discarded on the next start anyway
    }
    throw Error(ErrorCode::StorageFailure, "journal append failed: " + why);
  }
  if (durable_ && ::fdatasync(fd_) != 0) {
    throw Error(ErrorCode::StorageFailure,
                std::string("journal sync failed: ") + std::strerror(errno));
  }
}

fs::path snapshot_path(const fs::path& journal) {
  fs::path p = journal;
  p += ".snap";
  return p;
}

void write_snapshot(const fs::path& journal, std::uint64_t seq, const engine::Engine& engine) {
  const json doc{{"seq", seq},
                 {"digest", engine::state_digest(engine)},
                 {"state",
                  {{"game", engine::to_json(engine.state())},
                   {"tracker", tracker::to_json(*engine.tracker().snapshot())}}}};
  const fs::path target = snapshot_path(journal);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << doc.dump() << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::StorageFailure, "cannot write snapshot " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw Error(ErrorCode::StorageFailure, "cannot install snapshot: " + ec.message());
}

namespace {

void apply_record(engine::Engine& engine, const JournalRecord& r) {
  engine::Command cmd;
  try {
    cmd = engine::command_from_json(r.command);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::CorruptRecord,
                "journal seq " + std::to_string(r.seq) + " holds no valid command: " + e.what(),
                {{"seq", r.seq}});
  }
  try {
    engine::apply_command(engine, cmd, r.timestamp_ms);
  } catch (const Error& e) {
    throw Error(ErrorCode::DigestMismatch,
                "journal seq " + std::to_string(r.seq) + " no longer applies: " + e.what(),
                {{"seq", r.seq}});
  }
  if (engine::state_digest(engine) != r.digest) {
    throw Error(ErrorCode::DigestMismatch, "state digest diverges at seq " + std::to_string(r.seq),
                {{"seq", r.seq}});
  }
}

std::unique_ptr<engine::Engine> load_snapshot(const fs::path& journal,
                                              const std::vector<JournalRecord>& records,
                                              std::uint64_t& seq) {
  const fs::path p = snapshot_path(journal);
  if (!fs::exists(p)) return nullptr;
  try {
    std::ifstream in(p, std::ios::binary);
    const json doc = json::parse(in);
    seq = doc.at("seq").get<std::uint64_t>();
    const std::string digest = doc.at("digest").get<std::string>();
    if (seq == 0 || seq > records.size() || records[seq - 1].digest != digest) {
      throw std::runtime_error("snapshot does not match the journal");
    }
    auto engine = std::make_unique<engine::Engine>(
        engine::game_state_from_json(doc.at("state").at("game")),
        tracker::snapshot_from_json(doc.at("state").at("tracker")));
    if (engine::state_digest(*engine) != digest) {
      throw std::runtime_error("snapshot content does not hash to its digest");
    }
    return engine;
  } catch (const std::exception& e) {
    std::cerr << "mep: ignoring snapshot " << p << ": " << e.what() << '\n';
    seq = 0;
    return nullptr;
  }
}

}  // namespace

ReplayResult replay_records(const std::vector<JournalRecord>& records,
                            const gamedef::GameDefinition& def) {
  ReplayResult out;
  out.engine = gamedef::instantiate(def);
  for (const auto& r : records) apply_record(*out.engine, r);
  out.last_seq = records.size();
  out.digest = engine::state_digest(*out.engine);
  return out;
}

ReplayResult replay(const fs::path& journal, const gamedef::GameDefinition& def,
                    bool use_snapshot) {
  JournalContents contents = read_journal(journal);
  ReplayResult out;
  out.torn_tail = contents.torn_tail;
  if (use_snapshot) out.engine = load_snapshot(journal, contents.records, out.snapshot_seq);
  if (!out.engine) {
    out.engine = gamedef::instantiate(def);
    out.snapshot_seq = 0;
  }
  for (std::size_t i = out.snapshot_seq; i < contents.records.size(); ++i) {
    apply_record(*out.engine, contents.records[i]);
  }
  out.last_seq = contents.records.size();
  out.digest = engine::state_digest(*out.engine);
  return out;
}

}  // namespace mep::server
