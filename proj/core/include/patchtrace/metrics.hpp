#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "patchtrace/hybrid.hpp"

namespace patchtrace {

/// 1-based rank of the first patch commit in a ranked list, or absent when
/// no patch made the list.
struct RankOutcome {
    std::string cve_id;
    std::optional<std::size_t> first_relevant_rank;

    bool traced_within(std::size_t k) const {
        return first_relevant_rank && *first_relevant_rank <= k;
    }
};

RankOutcome rank_of_patch(const RankedList& rl, const std::unordered_set<std::string>& patch_ids);

/// |{rank present and <= K}| / |outcomes|. K >= 1, outcomes non-empty.
double recall_at_k(const std::vector<RankOutcome>& outcomes, std::size_t k);

/// Mean of 1/rank; absent outcomes contribute 0.
double mrr(const std::vector<RankOutcome>& outcomes);

/// Mean of min(rank, K); absent outcomes cost the full K.
double manual_efforts_at_k(const std::vector<RankOutcome>& outcomes, std::size_t k);

// Metrics report: CSV table `metric,K,value` (6-decimal values, K empty
// for MRR) plus a human-readable summary with one row per K.

struct MetricsReport {
    /// Variant name (e.g. "phase1", "phase2") -> outcomes over the split.
    std::vector<std::pair<std::string, std::vector<RankOutcome>>> variants;
    std::vector<std::size_t> k_list;
};

void write_report_csv(const MetricsReport& report, std::ostream& out);
void write_report_csv(const MetricsReport& report, const std::string& path);
std::string format_report_text(const MetricsReport& report);

}  // namespace patchtrace
