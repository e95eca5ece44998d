#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "patchtrace/types.hpp"

namespace patchtrace {

inline constexpr std::size_t kDefaultNegativeSampleSize = 5000;

/// Builds the candidate set for one CVE: every patch commit present in the
/// corpus (in corpus order), plus min(n, remaining) non-patch commits drawn
/// uniformly without replacement with the seeded deterministic generator.
/// Repositories with fewer than n non-patch commits contribute all of them.
CandidateSet sample_negatives(const std::vector<Commit>& corpus,
                              const std::unordered_set<std::string>& patch_ids,
                              std::size_t n = kDefaultNegativeSampleSize,
                              std::uint64_t seed = 0,
                              std::string cve_id = {});

/// Deterministic shuffled partition of the records by CVE. Non-train bucket
/// sizes are the nearest integer to their exact share; the training bucket
/// absorbs the remainder. With fewer records than buckets, each bucket gets
/// at most one record.
std::map<std::string, Split> split_dataset(const std::vector<CveRecord>& records,
                                           const std::array<std::uint32_t, 3>& ratios,
                                           std::uint64_t seed);

}  // namespace patchtrace
