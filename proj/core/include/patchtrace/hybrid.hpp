#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "patchtrace/commit_index.hpp"
#include "patchtrace/embed.hpp"
#include "patchtrace/types.hpp"

namespace patchtrace {

/// Phase-1 fusion weight and candidate-list cutoff.
struct HybridConfig {
    double lambda = 1.0;
    std::size_t top_k = 100;
};

enum class Provenance { phase1, phase2 };

const char* to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

struct RankedEntry {
    std::string hash;
    double score = 0.0;
    Provenance provenance = Provenance::phase1;
    std::int64_t author_time = 0;  // carried for deterministic tie-breaking
};

/// Ordered candidate list for one CVE: scores non-increasing, ties broken
/// by descending author_time then ascending hash, no duplicate hashes.
struct RankedList {
    std::string cve_id;
    std::vector<RankedEntry> entries;
};

/// Sorts entries into the canonical order above.
void sort_ranked_entries(std::vector<RankedEntry>& entries);

/// f(sim, cos) = sim + lambda * cos.
double fuse(double sim, double cos, double lambda);

/// Scores every candidate with fuse(semantic F1, lexical cosine, lambda)
/// and retains the top min(top_k, |candidates|) entries in canonical
/// order. Provider failures become PartialResultError carrying the number
/// of candidates completed.
RankedList retrieve_topk(const CveRecord& cve,
                         const CandidateSet& cs,
                         const CommitIndex& commits,
                         const HybridConfig& cfg,
                         EmbeddingProvider& provider);

/// The grid searched by tune_lambda: 0.10, 0.15, ..., 10.00.
std::vector<double> default_lambda_grid();

/// Grid value maximizing validation Recall@top_k; ties go to the smaller
/// lambda. Component scores are computed once per CVE and reused across
/// the grid.
double tune_lambda(const std::vector<std::pair<CveRecord, CandidateSet>>& validation,
                   const CommitIndex& commits,
                   const HybridConfig& cfg,
                   const std::vector<double>& grid,
                   EmbeddingProvider& provider);

// Ranked-list serialization: CSV records `cve_id,rank,hash,score,provenance`
// with a header row, scores printed with 6 decimals, lists concatenated in
// ascending cve_id order.

void save_ranked_lists(const std::vector<RankedList>& lists, std::ostream& out);
void save_ranked_lists(const std::vector<RankedList>& lists, const std::string& path);

/// Throws FormatError with the line number on ill-formed input. author_time
/// fields are zero until attach_author_times is called.
std::vector<RankedList> load_ranked_lists(std::istream& in);
std::vector<RankedList> load_ranked_lists(const std::string& path);

/// Fills entry author_time from the commit corpus (unknown hashes keep 0).
void attach_author_times(std::vector<RankedList>& lists, const CommitIndex& commits);

}  // namespace patchtrace
