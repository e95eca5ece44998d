#pragma once

#include <string>
#include <vector>

#include "patchtrace/embed.hpp"
#include "patchtrace/preprocess.hpp"

namespace patchtrace {

/// Greedy token-matching similarity between two embedded sequences.
/// recall averages over the description side, precision over the commit
/// side; f1 combines them (0 when both are 0).
struct MatchScore {
    double recall = 0.0;
    double precision = 0.0;
    double f1 = 0.0;
};

/// R = mean over description rows of max(0, max_n <d_m, c_n>), P the same
/// with roles swapped, F1 = 2RP/(R+P). Inner products only; rows are
/// pre-normalized. Negative similarities are floored at 0 so every
/// component stays in [0, 1].
MatchScore greedy_match(const TokenEmbeddings& desc, const TokenEmbeddings& commit);

/// Per-candidate F1 against the CVE tokens, order-aligned with the input.
/// [CLS]/[MSG] marker tokens are excluded from matching; a candidate with
/// no content tokens scores 0. Provider failures are rethrown with the
/// candidate index attached.
std::vector<double> semantic_scores(const std::vector<std::string>& cve_tokens,
                                    const std::vector<FormattedCommitSequence>& candidates,
                                    EmbeddingProvider& provider);

}  // namespace patchtrace
