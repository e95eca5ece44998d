#include "patchtrace/commit_log.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "patchtrace/errors.hpp"

namespace patchtrace {

namespace {

// days since 1970-01-01 for a proleptic Gregorian civil date
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
}

bool parse_fixed_number(const std::string& s, std::size_t pos, std::size_t len, long& out) {
    if (pos + len > s.size()) return false;
    long v = 0;
    for (std::size_t i = 0; i < len; ++i) {
        char c = s[pos + i];
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
        v = v * 10 + (c - '0');
    }
    out = v;
    return true;
}

struct LineCursor {
    const std::string& text;
    std::size_t pos = 0;

    bool at_end() const { return pos >= text.size(); }

    // Returns the next line without its terminator and advances past it.
    std::string next_line() {
        std::size_t nl = text.find('\n', pos);
        std::string line;
        if (nl == std::string::npos) {
            line = text.substr(pos);
            pos = text.size();
        } else {
            line = text.substr(pos, nl - pos);
            pos = nl + 1;
        }
        return line;
    }
};

std::string join_lines(const std::vector<std::string>& lines) {
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i) out += '\n';
        out += lines[i];
    }
    return out;
}

bool is_sentinel(const std::string& line, char c) { return line.size() == 1 && line[0] == c; }

void write_section(std::ostream& out, const std::string& section) {
    if (section.empty()) return;
    out << section;
    out << '\n';
}

void check_section(const std::string& section, const char* name) {
    // Sentinel characters inside a section would be re-parsed as structure.
    std::size_t pos = 0;
    while (pos <= section.size()) {
        std::size_t nl = section.find('\n', pos);
        std::size_t end = nl == std::string::npos ? section.size() : nl;
        if (end - pos == 1 &&
            (section[pos] == kRecordSeparator || section[pos] == kSectionSeparator)) {
            throw Error(std::string("commit ") + name + " contains a separator sentinel line");
        }
        if (nl == std::string::npos) break;
        pos = nl + 1;
    }
}

}  // namespace

std::int64_t parse_iso8601(const std::string& text) {
    // YYYY-MM-DDTHH:MM:SS followed by 'Z', '+HH:MM', '-HH:MM' or '+HHMM'.
    long year, month, day, hour, minute, second;
    if (!parse_fixed_number(text, 0, 4, year) || text.size() < 20 || text[4] != '-' ||
        !parse_fixed_number(text, 5, 2, month) || text[7] != '-' ||
        !parse_fixed_number(text, 8, 2, day) || (text[10] != 'T' && text[10] != ' ') ||
        !parse_fixed_number(text, 11, 2, hour) || text[13] != ':' ||
        !parse_fixed_number(text, 14, 2, minute) || text[16] != ':' ||
        !parse_fixed_number(text, 17, 2, second)) {
        throw Error("invalid ISO-8601 timestamp: " + text);
    }
    if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 ||
        second > 60) {
        throw Error("invalid ISO-8601 timestamp: " + text);
    }
    std::int64_t offset = 0;
    std::size_t tz = 19;
    if (tz >= text.size()) throw Error("missing timezone in timestamp: " + text);
    char tzc = text[tz];
    if (tzc == 'Z') {
        if (tz + 1 != text.size()) throw Error("trailing characters in timestamp: " + text);
    } else if (tzc == '+' || tzc == '-') {
        long oh = 0, om = 0;
        if (!parse_fixed_number(text, tz + 1, 2, oh)) {
            throw Error("invalid timezone offset in timestamp: " + text);
        }
        std::size_t mpos = tz + 3;
        if (mpos < text.size() && text[mpos] == ':') ++mpos;
        if (!parse_fixed_number(text, mpos, 2, om) || mpos + 2 != text.size()) {
            throw Error("invalid timezone offset in timestamp: " + text);
        }
        offset = (oh * 3600 + om * 60) * (tzc == '-' ? -1 : 1);
    } else {
        throw Error("invalid timezone in timestamp: " + text);
    }
    std::int64_t days = days_from_civil(year, static_cast<unsigned>(month),
                                        static_cast<unsigned>(day));
    return days * 86400 + hour * 3600 + minute * 60 + second - offset;
}

std::string format_iso8601(std::int64_t epoch_seconds) {
    std::int64_t days = epoch_seconds / 86400;
    std::int64_t rem = epoch_seconds % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    std::int64_t y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                  static_cast<long long>(y), m, d, static_cast<long long>(rem / 3600),
                  static_cast<long long>((rem / 60) % 60), static_cast<long long>(rem % 60));
    return buf;
}

std::vector<Commit> ingest_commit_log(const std::string& text) {
    std::vector<Commit> commits;
    if (text.empty()) return commits;

    LineCursor cursor{text};
    std::size_t record_index = 0;
    std::size_t record_offset = 0;

    enum class State { hash, time, message, diff };
    State state = State::hash;
    Commit current;
    std::vector<std::string> section;

    auto fail = [&](const std::string& what) -> ParseError {
        return ParseError(what, record_offset, record_index);
    };
    auto finish_record = [&]() {
        if (state != State::diff) {
            throw fail("truncated record: expected two section separators");
        }
        current.diff = join_lines(section);
        section.clear();
        commits.push_back(std::move(current));
        current = Commit{};
        ++record_index;
        state = State::hash;
    };

    while (!cursor.at_end()) {
        std::size_t line_offset = cursor.pos;
        std::string line = cursor.next_line();
        if (is_sentinel(line, kRecordSeparator)) {
            finish_record();
            record_offset = cursor.pos;
            continue;
        }
        switch (state) {
            case State::hash:
                if (line.empty() || is_sentinel(line, kSectionSeparator)) {
                    throw fail("missing commit hash");
                }
                current.hash = line;
                state = State::time;
                break;
            case State::time:
                if (is_sentinel(line, kSectionSeparator)) {
                    throw fail("missing author time line");
                }
                try {
                    current.author_time = parse_iso8601(line);
                } catch (const Error& e) {
                    throw ParseError(e.what(), line_offset, record_index);
                }
                state = State::message;
                // the next line must be the first section separator
                if (cursor.at_end() ||
                    !is_sentinel(cursor.next_line(), kSectionSeparator)) {
                    throw fail("expected section separator after author time");
                }
                break;
            case State::message:
                if (is_sentinel(line, kSectionSeparator)) {
                    current.message = join_lines(section);
                    section.clear();
                    state = State::diff;
                } else {
                    section.push_back(std::move(line));
                }
                break;
            case State::diff:
                section.push_back(std::move(line));
                break;
        }
    }
    finish_record();
    return commits;
}

std::vector<Commit> ingest_commit_log(std::istream& log_stream) {
    std::ostringstream buf;
    buf << log_stream.rdbuf();
    return ingest_commit_log(buf.str());
}

std::vector<Commit> ingest_commit_log_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open commit log: " + path);
    return ingest_commit_log(in);
}

void serialize_commit_log(const std::vector<Commit>& commits, std::ostream& out) {
    for (std::size_t i = 0; i < commits.size(); ++i) {
        const Commit& c = commits[i];
        if (c.hash.empty() || c.hash.find('\n') != std::string::npos) {
            throw Error("commit hash must be a single non-empty line");
        }
        check_section(c.message, "message");
        check_section(c.diff, "diff");
        if (i) out << kRecordSeparator << '\n';
        out << c.hash << '\n';
        out << format_iso8601(c.author_time) << '\n';
        out << kSectionSeparator << '\n';
        write_section(out, c.message);
        out << kSectionSeparator << '\n';
        write_section(out, c.diff);
    }
}

std::string serialize_commit_log(const std::vector<Commit>& commits) {
    std::ostringstream out;
    serialize_commit_log(commits, out);
    return out.str();
}

}  // namespace patchtrace
