#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "patchtrace/commit_index.hpp"
#include "patchtrace/metrics.hpp"
#include "patchtrace/pipeline_config.hpp"
#include "patchtrace/reranker.hpp"
#include "patchtrace/types.hpp"

namespace patchtrace {

// Orchestration shared by the CLI and the integration tests. These compose
// the module APIs without introducing any arithmetic of their own.

struct IngestReport {
    Dataset dataset;
    std::size_t commit_count = 0;
    std::size_t cve_count = 0;
    std::size_t positive_count = 0;
    std::vector<std::string> warnings;  // missing patch hashes, skipped CVEs
};

/// Builds a dataset from ingested commits and manifest records: resolves
/// patch ids against the corpus (warning per missing hash; a CVE is kept
/// if any patch id resolves, else skipped with a notice), samples
/// negatives per CVE, and assigns the 8:1:1 split.
IngestReport build_dataset(const std::vector<Commit>& commits,
                           std::vector<CveRecord> records,
                           const PipelineConfig& cfg);

/// Phase-1 ranking for every CVE in the dataset, ascending cve_id order.
std::vector<RankedList> phase1_rank_all(const Dataset& ds,
                                        const CommitIndex& commits,
                                        const PipelineConfig& cfg,
                                        EmbeddingProvider& provider);

/// Fraction of ranked CVEs whose patch appears in their list.
double phase1_coverage(const Dataset& ds, const std::vector<RankedList>& lists);

/// Training pairs from the phase-1 lists of one split: positives are true
/// patches inside the top-k, negatives the rest. CVEs whose patch missed
/// the top-k contribute only negatives.
std::vector<TrainingPair> build_training_pairs(const Dataset& ds,
                                               const std::vector<RankedList>& phase1,
                                               const CommitIndex& commits,
                                               Split split,
                                               EmbeddingProvider& provider);

/// Re-ranks every list whose CVE is in the dataset, preserving order.
std::vector<RankedList> rerank_all(const Dataset& ds,
                                   const std::vector<RankedList>& phase1,
                                   const LinearHead& head,
                                   const CommitIndex& commits,
                                   EmbeddingProvider& provider);

/// Rank outcomes for the CVEs of one split (ascending cve_id).
std::vector<RankOutcome> outcomes_for_split(const Dataset& ds,
                                            const std::vector<RankedList>& lists,
                                            Split split);

}  // namespace patchtrace
