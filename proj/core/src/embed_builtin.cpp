#include <cmath>

#include "patchtrace/detail/rng.hpp"
#include "patchtrace/embed.hpp"
#include "patchtrace/errors.hpp"

namespace patchtrace {

std::vector<PooledEmbedding> EmbeddingProvider::embed_pooled_batch(
    const std::vector<std::vector<std::string>>& sequences) {
    std::vector<PooledEmbedding> out;
    out.reserve(sequences.size());
    for (const auto& seq : sequences) out.push_back(embed_pooled(seq));
    return out;
}

BuiltinProvider::BuiltinProvider(std::size_t dim, std::uint64_t seed)
    : dim_(dim), seed_(seed) {
    if (dim_ == 0) throw Error("embedding dimension must be positive");
}

const std::vector<double>& BuiltinProvider::vector_for(const std::string& token) {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = cache_.find(token);
    if (it != cache_.end()) return it->second;

    // Expand the seeded token hash into dim_ coordinates in [-1, 1), then
    // normalize. Identical tokens map to identical vectors by construction.
    detail::Rng rng(seed_ ^ detail::fnv1a64(token));
    std::vector<double> v(dim_);
    double norm_sq = 0.0;
    for (double& x : v) {
        x = rng.uniform01() * 2.0 - 1.0;
        norm_sq += x * x;
    }
    const double norm = std::sqrt(norm_sq);
    if (norm < 1e-12) {
        v.assign(dim_, 0.0);
        v[0] = 1.0;
    } else {
        for (double& x : v) x /= norm;
    }
    return cache_.emplace(token, std::move(v)).first->second;
}

TokenEmbeddings BuiltinProvider::embed_tokens(const std::vector<std::string>& tokens) {
    if (tokens.empty()) throw Error("embed_tokens requires a non-empty token list");
    if (tokens.size() > 512) throw Error("embed_tokens accepts at most 512 tokens");

    TokenEmbeddings emb;
    emb.dim = dim_;
    emb.data.reserve(tokens.size() * dim_);
    for (const auto& t : tokens) {
        const std::vector<double>& v = vector_for(t);
        emb.data.insert(emb.data.end(), v.begin(), v.end());
    }
    return emb;
}

PooledEmbedding BuiltinProvider::embed_pooled(const std::vector<std::string>& tokens) {
    if (tokens.empty()) throw Error("embed_pooled requires a non-empty token list");
    if (tokens.size() > 512) throw Error("embed_pooled accepts at most 512 tokens");

    PooledEmbedding pooled;
    pooled.vector.assign(dim_, 0.0);
    for (const auto& t : tokens) {
        const std::vector<double>& v = vector_for(t);
        for (std::size_t d = 0; d < dim_; ++d) pooled.vector[d] += v[d];
    }
    const double inv = 1.0 / static_cast<double>(tokens.size());
    double norm_sq = 0.0;
    for (double& x : pooled.vector) {
        x *= inv;
        norm_sq += x * x;
    }
    double norm = std::sqrt(norm_sq);
    if (norm < 1e-12) {
        // degenerate cancellation; fall back to a fixed unit vector
        pooled.vector.assign(dim_, 0.0);
        pooled.vector[0] = 1.0;
        return pooled;
    }
    for (double& x : pooled.vector) x /= norm;
    return pooled;
}

}  // namespace patchtrace
