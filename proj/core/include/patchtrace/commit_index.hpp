#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "patchtrace/types.hpp"

namespace patchtrace {

/// Hash-addressable view over an ingested commit corpus.
class CommitIndex {
public:
    CommitIndex() = default;
    explicit CommitIndex(std::vector<Commit> commits);

    const Commit* find(const std::string& hash) const;

    /// Lookup that throws Error when the hash is unknown.
    const Commit& at(const std::string& hash) const;

    const std::vector<Commit>& commits() const { return commits_; }
    std::size_t size() const { return commits_.size(); }
    bool empty() const { return commits_.empty(); }

private:
    std::vector<Commit> commits_;
    std::unordered_map<std::string, std::size_t> by_hash_;
};

}  // namespace patchtrace
