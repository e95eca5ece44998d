#include "patchtrace/semantic.hpp"

#include <algorithm>

#include "patchtrace/errors.hpp"

namespace patchtrace {

MatchScore greedy_match(const TokenEmbeddings& desc, const TokenEmbeddings& commit) {
    if (desc.token_count() == 0 || commit.token_count() == 0) {
        throw Error("greedy_match requires non-empty embeddings on both sides");
    }
    if (desc.dim != commit.dim) {
        throw Error("greedy_match dimension mismatch: " + std::to_string(desc.dim) + " vs " +
                    std::to_string(commit.dim));
    }

    const std::size_t nd = desc.token_count();
    const std::size_t nc = commit.token_count();
    std::vector<double> best_for_commit(nc, 0.0);

    double recall_sum = 0.0;
    for (std::size_t m = 0; m < nd; ++m) {
        const auto d_row = desc.row(m);
        double best = 0.0;  // negative similarities floor at 0
        for (std::size_t n = 0; n < nc; ++n) {
            const auto c_row = commit.row(n);
            double dot = 0.0;
            for (std::size_t k = 0; k < desc.dim; ++k) dot += d_row[k] * c_row[k];
            best = std::max(best, dot);
            best_for_commit[n] = std::max(best_for_commit[n], dot);
        }
        recall_sum += best;
    }

    double precision_sum = 0.0;
    for (double b : best_for_commit) precision_sum += b;

    MatchScore score;
    score.recall = std::min(1.0, recall_sum / static_cast<double>(nd));
    score.precision = std::min(1.0, precision_sum / static_cast<double>(nc));
    const double rp = score.recall + score.precision;
    score.f1 = rp > 0.0 ? 2.0 * score.recall * score.precision / rp : 0.0;
    return score;
}

std::vector<double> semantic_scores(const std::vector<std::string>& cve_tokens,
                                    const std::vector<FormattedCommitSequence>& candidates,
                                    EmbeddingProvider& provider) {
    if (cve_tokens.empty()) throw Error("semantic_scores requires a non-empty CVE token list");

    const TokenEmbeddings desc = provider.embed_tokens(cve_tokens);
    std::vector<double> scores;
    scores.reserve(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        std::vector<std::string> content = candidates[i].content_tokens();
        if (content.empty()) {
            scores.push_back(0.0);
            continue;
        }
        try {
            const TokenEmbeddings commit = provider.embed_tokens(content);
            scores.push_back(greedy_match(desc, commit).f1);
        } catch (const CandidateProviderError&) {
            throw;
        } catch (const ProviderError& e) {
            throw CandidateProviderError(e.what(), i);
        }
    }
    return scores;
}

}  // namespace patchtrace
