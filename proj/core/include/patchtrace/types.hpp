#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_set>
#include <vector>

namespace patchtrace {

/// One repository change-set: the unit being ranked.
struct Commit {
    std::string hash;
    std::string message;
    std::string diff;
    std::int64_t author_time = 0;  // seconds since epoch, UTC

    friend bool operator==(const Commit&, const Commit&) = default;
};

/// A disclosed vulnerability: identifier, natural-language description and
/// the known ground-truth patch commits.
struct CveRecord {
    std::string cve_id;
    std::string description;
    std::string repo_id;
    std::vector<std::string> patch_commit_ids;  // kept sorted and unique

    friend bool operator==(const CveRecord&, const CveRecord&) = default;
};

/// The labeled candidate pool for one CVE.
struct CandidateSet {
    std::string cve_id;
    std::vector<std::string> candidates;          // ordered: patches first, then sampled negatives
    std::unordered_set<std::string> patch_labels; // hashes labeled "patch"

    bool is_patch(const std::string& hash) const { return patch_labels.count(hash) != 0; }

    friend bool operator==(const CandidateSet&, const CandidateSet&) = default;
};

enum class Split { train, validation, test };

const char* to_string(Split s);
Split split_from_string(const std::string& s);

/// CVE records plus their candidate sets and the by-CVE split assignment.
/// Immutable after construction; safe for concurrent readers.
struct Dataset {
    std::vector<CveRecord> records;
    std::map<std::string, CandidateSet> candidate_sets;  // keyed by cve_id
    std::map<std::string, Split> split;                  // keyed by cve_id

    const CveRecord* find_record(const std::string& cve_id) const;

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

}  // namespace patchtrace
