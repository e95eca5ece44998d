#include "patchtrace/commit_index.hpp"

#include "patchtrace/errors.hpp"

namespace patchtrace {

CommitIndex::CommitIndex(std::vector<Commit> commits) : commits_(std::move(commits)) {
    by_hash_.reserve(commits_.size());
    for (std::size_t i = 0; i < commits_.size(); ++i) {
        auto [it, inserted] = by_hash_.emplace(commits_[i].hash, i);
        if (!inserted) throw Error("duplicate commit hash in corpus: " + commits_[i].hash);
    }
}

const Commit* CommitIndex::find(const std::string& hash) const {
    auto it = by_hash_.find(hash);
    return it == by_hash_.end() ? nullptr : &commits_[it->second];
}

const Commit& CommitIndex::at(const std::string& hash) const {
    if (const Commit* c = find(hash)) return *c;
    throw Error("commit not found in corpus: " + hash);
}

}  // namespace patchtrace
