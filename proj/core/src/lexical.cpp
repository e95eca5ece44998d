#include "patchtrace/lexical.hpp"

#include <cmath>
#include <string_view>
#include <unordered_set>

namespace patchtrace {

namespace {

void count_document(VocabStats& stats, const std::vector<std::string>& doc) {
    std::unordered_set<std::string_view> seen;
    for (const auto& term : doc) {
        if (seen.insert(term).second) ++stats.df[term];
    }
}

}  // namespace

double TfIdfVector::norm() const {
    double sum = 0.0;
    for (const auto& [term, w] : weights) sum += w * w;
    return std::sqrt(sum);
}

VocabStats build_corpus_stats(const std::vector<std::vector<std::string>>& docs) {
    VocabStats stats;
    stats.doc_count = docs.size();
    for (const auto& doc : docs) count_document(stats, doc);
    return stats;
}

TfIdfVector tfidf_vector(const std::vector<std::string>& doc, const VocabStats& stats) {
    TfIdfVector vec;
    if (doc.empty()) return vec;

    std::unordered_map<std::string, std::size_t> counts;
    for (const auto& term : doc) ++counts[term];

    const double len = static_cast<double>(doc.size());
    const double n_plus_1 = static_cast<double>(stats.doc_count + 1);
    for (const auto& [term, count] : counts) {
        const double idf = std::log(n_plus_1 / static_cast<double>(stats.df_of(term) + 1));
        const double w = (static_cast<double>(count) / len) * idf;
        if (w != 0.0) vec.weights.emplace(term, w);
    }
    return vec;
}

double cosine(const TfIdfVector& a, const TfIdfVector& b) {
    const TfIdfVector& small = a.weights.size() <= b.weights.size() ? a : b;
    const TfIdfVector& large = a.weights.size() <= b.weights.size() ? b : a;
    double dot = 0.0;
    for (const auto& [term, w] : small.weights) {
        auto it = large.weights.find(term);
        if (it != large.weights.end()) dot += w * it->second;
    }
    if (dot == 0.0) return 0.0;
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    // non-negative weights keep this in [0, 1]; guard the last-ulp overshoot
    return std::min(1.0, dot / (na * nb));
}

std::vector<double> lexical_scores(const std::vector<std::string>& cve_tokens,
                                   const std::vector<std::vector<std::string>>& candidates) {
    // The CVE description and every candidate are separate documents of one
    // shared corpus.
    VocabStats stats;
    stats.doc_count = candidates.size() + 1;
    count_document(stats, cve_tokens);
    for (const auto& c : candidates) count_document(stats, c);

    const TfIdfVector cve_vec = tfidf_vector(cve_tokens, stats);
    std::vector<double> scores;
    scores.reserve(candidates.size());
    for (const auto& c : candidates) {
        scores.push_back(cosine(cve_vec, tfidf_vector(c, stats)));
    }
    return scores;
}

}  // namespace patchtrace
