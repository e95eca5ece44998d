#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace patchtrace {

/// L x D matrix of per-token embedding rows, each pre-normalized to unit
/// L2 norm so cosine reduces to the inner product.
struct TokenEmbeddings {
    std::size_t dim = 0;
    std::vector<double> data;  // row-major, size() == token_count * dim

    std::size_t token_count() const { return dim == 0 ? 0 : data.size() / dim; }
    std::span<const double> row(std::size_t i) const { return {data.data() + i * dim, dim}; }
};

/// Unit-norm sequence-level embedding.
struct PooledEmbedding {
    std::vector<double> vector;

    std::size_t dim() const { return vector.size(); }
};

/// Boundary to token-level and pooled sequence embeddings. Implementations
/// must be safe for concurrent calls and emit unit-norm vectors of one
/// fixed dimension.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    virtual std::size_t dim() const = 0;

    /// One unit-norm row per token. 1 <= |tokens| <= 512; empty input is a
    /// contract violation.
    virtual TokenEmbeddings embed_tokens(const std::vector<std::string>& tokens) = 0;

    /// Whole-sequence embedding, unit norm.
    virtual PooledEmbedding embed_pooled(const std::vector<std::string>& tokens) = 0;

    /// Batched pooled embeddings; the default loops over embed_pooled.
    virtual std::vector<PooledEmbedding> embed_pooled_batch(
        const std::vector<std::vector<std::string>>& sequences);
};

/// Deterministic context-free provider: each token's vector is a seeded
/// hash expanded to D pseudo-random coordinates and L2-normalized, so
/// identical tokens always map to identical vectors, across processes.
/// Pooled output is the normalized mean of the token vectors.
class BuiltinProvider final : public EmbeddingProvider {
public:
    static constexpr std::size_t kDefaultDim = 64;

    explicit BuiltinProvider(std::size_t dim = kDefaultDim, std::uint64_t seed = 0);

    std::size_t dim() const override { return dim_; }
    TokenEmbeddings embed_tokens(const std::vector<std::string>& tokens) override;
    PooledEmbedding embed_pooled(const std::vector<std::string>& tokens) override;

private:
    const std::vector<double>& vector_for(const std::string& token);

    std::size_t dim_;
    std::uint64_t seed_;
    std::mutex cache_mutex_;
    std::unordered_map<std::string, std::vector<double>> cache_;
};

/// Client for a remote encoder service speaking the JSON wire protocol:
/// request  {"sequences": [[token, ...], ...], "mode": "tokens"|"pooled"}
/// response {"dim": D, "vectors": [...]} with one flat row-major array per
/// sequence (tokens mode) or one D-array per sequence (pooled mode).
/// Requests are batched at most kMaxBatch sequences at a time. Non-2xx
/// responses and dimension mismatches raise ProviderError. Received
/// vectors are re-normalized to enforce the unit-norm contract.
class RemoteProvider final : public EmbeddingProvider {
public:
    static constexpr std::size_t kMaxBatch = 64;

    RemoteProvider(std::string endpoint, int timeout_ms = 10000);
    ~RemoteProvider() override;

    std::size_t dim() const override;
    TokenEmbeddings embed_tokens(const std::vector<std::string>& tokens) override;
    PooledEmbedding embed_pooled(const std::vector<std::string>& tokens) override;
    std::vector<PooledEmbedding> embed_pooled_batch(
        const std::vector<std::vector<std::string>>& sequences) override;

    const std::string& endpoint() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace patchtrace
