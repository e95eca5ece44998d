#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

namespace patchtrace {

/// Document-frequency statistics over a candidate corpus.
struct VocabStats {
    std::size_t doc_count = 0;
    std::unordered_map<std::string, std::size_t> df;

    std::size_t df_of(const std::string& term) const {
        auto it = df.find(term);
        return it == df.end() ? 0 : it->second;
    }
};

/// Sparse TF-IDF vector. No zero-weight entries are stored.
struct TfIdfVector {
    std::unordered_map<std::string, double> weights;

    double norm() const;
};

VocabStats build_corpus_stats(const std::vector<std::vector<std::string>>& docs);

/// weight(t) = (count(t, doc) / |doc|) * ln((N + 1) / (df(t) + 1)).
/// Unseen terms use df = 0 under the same smoothed formula.
TfIdfVector tfidf_vector(const std::vector<std::string>& doc, const VocabStats& stats);

/// Cosine similarity in [0, 1] (weights are non-negative). Zero-magnitude
/// vectors score 0.
double cosine(const TfIdfVector& a, const TfIdfVector& b);

/// Scores every candidate against the CVE token list. Stats are built over
/// the CVE document plus all candidate documents, each treated as a
/// separate document.
std::vector<double> lexical_scores(const std::vector<std::string>& cve_tokens,
                                   const std::vector<std::vector<std::string>>& candidates);

}  // namespace patchtrace
