#include "patchtrace/preprocess.hpp"

#include <algorithm>
#include <cctype>

namespace patchtrace {

namespace {

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }
bool is_lower(char c) { return std::islower(static_cast<unsigned char>(c)) != 0; }
bool is_lower_or_digit(char c) {
    unsigned char u = static_cast<unsigned char>(c);
    return std::islower(u) != 0 || std::isdigit(u) != 0;
}

void emit_token(std::vector<std::string>& out, std::string_view word) {
    if (word.empty()) return;
    std::string token(word);
    std::transform(token.begin(), token.end(), token.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (!stop_words().count(token)) out.push_back(std::move(token));
}

// Splits one alphanumeric run at camelCase boundaries: aB -> a|B, ABc -> A|Bc.
void split_camel(std::vector<std::string>& out, std::string_view run) {
    std::size_t start = 0;
    for (std::size_t i = 1; i < run.size(); ++i) {
        const bool lower_to_upper = is_lower_or_digit(run[i - 1]) && is_upper(run[i]);
        const bool acronym_end = i + 1 < run.size() && is_upper(run[i - 1]) &&
                                 is_upper(run[i]) && is_lower(run[i + 1]);
        if (lower_to_upper || acronym_end) {
            emit_token(out, run.substr(start, i - start));
            start = i;
        }
    }
    emit_token(out, run.substr(start));
}

bool starts_with(const std::string& line, std::string_view prefix) {
    return line.size() >= prefix.size() && line.compare(0, prefix.size(), prefix) == 0;
}

}  // namespace

std::string PrunedDiff::joined() const {
    std::string out;
    for (std::size_t i = 0; i < changed_lines.size(); ++i) {
        if (i) out += '\n';
        out += changed_lines[i];
    }
    return out;
}

PrunedDiff extract_changed_lines(std::string_view diff) {
    PrunedDiff pruned;
    std::size_t pos = 0;
    while (pos < diff.size()) {
        std::size_t nl = diff.find('\n', pos);
        std::size_t end = nl == std::string_view::npos ? diff.size() : nl;
        std::string line(diff.substr(pos, end - pos));
        pos = nl == std::string_view::npos ? diff.size() : nl + 1;

        if (line.empty() || (line[0] != '+' && line[0] != '-')) continue;
        if (starts_with(line, "+++") || starts_with(line, "---")) continue;
        if (pruned.changed_lines.size() == kMaxDiffLines) {
            pruned.truncated = true;
            break;
        }
        pruned.changed_lines.push_back(std::move(line));
    }
    return pruned;
}

std::vector<std::string> word_tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t start = 0;
    bool in_run = false;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        bool alnum = i < text.size() && is_alnum(text[i]);
        if (alnum && !in_run) {
            start = i;
            in_run = true;
        } else if (!alnum && in_run) {
            split_camel(tokens, text.substr(start, i - start));
            in_run = false;
        }
    }
    return tokens;
}

std::vector<std::string> FormattedCommitSequence::content_tokens() const {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) {
        if (t != kClsMarker && t != kMsgMarker) out.push_back(t);
    }
    return out;
}

FormattedCommitSequence format_commit(const Commit& c) {
    const std::vector<std::string> diff_tokens = word_tokenize(extract_changed_lines(c.diff).joined());
    const std::vector<std::string> msg_tokens = word_tokenize(c.message);

    // Budget: 512 total, two slots for the markers. The message is kept
    // whole when possible; the diff absorbs the truncation (earliest tokens
    // of each survive).
    const std::size_t budget = kMaxSequenceTokens - 2;
    const std::size_t msg_kept = std::min(msg_tokens.size(), budget);
    const std::size_t diff_kept = std::min(diff_tokens.size(), budget - msg_kept);

    FormattedCommitSequence seq;
    seq.tokens.reserve(2 + diff_kept + msg_kept);
    seq.tokens.push_back(kClsMarker);
    seq.tokens.insert(seq.tokens.end(), diff_tokens.begin(), diff_tokens.begin() + diff_kept);
    seq.tokens.push_back(kMsgMarker);
    seq.tokens.insert(seq.tokens.end(), msg_tokens.begin(), msg_tokens.begin() + msg_kept);
    return seq;
}

std::vector<std::string> commit_lexical_tokens(const Commit& c) {
    std::vector<std::string> tokens = word_tokenize(extract_changed_lines(c.diff).joined());
    std::vector<std::string> msg = word_tokenize(c.message);
    tokens.insert(tokens.end(), std::make_move_iterator(msg.begin()),
                  std::make_move_iterator(msg.end()));
    return tokens;
}

std::vector<std::string> description_tokens(const std::string& description) {
    std::vector<std::string> tokens = word_tokenize(description);
    if (tokens.size() > kMaxSequenceTokens) tokens.resize(kMaxSequenceTokens);
    return tokens;
}

}  // namespace patchtrace
