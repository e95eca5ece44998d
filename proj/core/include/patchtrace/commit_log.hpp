#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "patchtrace/types.hpp"

namespace patchtrace {

// Commit-log export format. Records are separated by a line holding the
// single RS character (0x1e). Within a record:
//
//   line 1: commit hash
//   line 2: ISO-8601 author time (UTC "Z" or numeric offset)
//   a line holding the single US character (0x1f)
//   the commit message, verbatim
//   a line holding the single US character (0x1f)
//   the diff, verbatim
//
// The sentinel lines make the format safe for messages and diffs that
// contain blank lines or '---' markers.

inline constexpr char kRecordSeparator = '\x1e';
inline constexpr char kSectionSeparator = '\x1f';

/// Parses a commit-log export stream. Order is preserved and message/diff
/// sections are captured verbatim. Throws ParseError on malformed records,
/// naming the byte offset and record index.
std::vector<Commit> ingest_commit_log(std::istream& log_stream);
std::vector<Commit> ingest_commit_log(const std::string& text);
std::vector<Commit> ingest_commit_log_file(const std::string& path);

/// Writes commits in the export format above; the exact inverse of
/// ingest_commit_log. Throws Error if a message or diff contains a line
/// equal to one of the sentinel characters.
void serialize_commit_log(const std::vector<Commit>& commits, std::ostream& out);
std::string serialize_commit_log(const std::vector<Commit>& commits);

/// "YYYY-MM-DDTHH:MM:SSZ" / "...±HH:MM" → seconds since epoch, UTC.
std::int64_t parse_iso8601(const std::string& text);
std::string format_iso8601(std::int64_t epoch_seconds);

}  // namespace patchtrace
