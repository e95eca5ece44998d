#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "patchtrace/types.hpp"

namespace patchtrace {

inline constexpr std::size_t kMaxDiffLines = 1000;
inline constexpr std::size_t kMaxSequenceTokens = 512;
inline const std::string kClsMarker = "[CLS]";
inline const std::string kMsgMarker = "[MSG]";

/// The change-bearing lines of a diff: every line starting with '+' or '-'
/// except the '+++'/'---' file headers, in order, capped at the first
/// kMaxDiffLines lines.
struct PrunedDiff {
    std::vector<std::string> changed_lines;
    bool truncated = false;

    std::string joined() const;  // lines joined with '\n'
};

PrunedDiff extract_changed_lines(std::string_view diff);

/// Lexical tokenizer: lowercase, split on non-alphanumeric characters and
/// camelCase boundaries, drop stop words. Total on any input; emits only
/// non-empty lowercase alphanumeric tokens.
std::vector<std::string> word_tokenize(std::string_view text);

/// The fixed stop-word list compiled into the library; byte-identical to
/// the data/stopwords.txt resource.
const std::unordered_set<std::string>& stop_words();

/// Encoder input: [CLS], pruned-diff tokens, [MSG], message tokens, at most
/// kMaxSequenceTokens total. Under budget pressure the diff is truncated
/// first (earliest tokens kept); the [MSG] marker is always present and the
/// message loses tokens only when it alone exceeds the budget.
struct FormattedCommitSequence {
    std::vector<std::string> tokens;

    /// Tokens with the [CLS]/[MSG] markers removed.
    std::vector<std::string> content_tokens() const;
};

FormattedCommitSequence format_commit(const Commit& c);

/// Tokens of the pruned diff followed by tokens of the message; the
/// commit-as-document view used by the lexical retriever (no length cap
/// beyond the 1,000-line diff pruning).
std::vector<std::string> commit_lexical_tokens(const Commit& c);

/// word_tokenize(description) capped at kMaxSequenceTokens.
std::vector<std::string> description_tokens(const std::string& description);

}  // namespace patchtrace
