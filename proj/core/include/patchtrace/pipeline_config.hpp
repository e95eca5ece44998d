#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "patchtrace/embed.hpp"
#include "patchtrace/hybrid.hpp"
#include "patchtrace/reranker.hpp"

namespace patchtrace {

enum class ProviderKind { builtin, remote };

/// Everything a pipeline run needs. All randomness flows from `seed` via
/// named sub-seeds (sampling, split, provider, training shuffle).
struct PipelineConfig {
    double lambda = 1.0;
    std::size_t top_k = 100;
    std::size_t negative_sample_size = 5000;
    std::vector<std::size_t> k_list = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 20, 30, 50, 100};
    std::uint64_t seed = 0;

    ProviderKind provider = ProviderKind::builtin;
    std::size_t provider_dim = BuiltinProvider::kDefaultDim;
    std::string endpoint = "http://127.0.0.1:8356";
    int timeout_ms = 10000;

    TrainConfig train;

    HybridConfig hybrid() const { return HybridConfig{lambda, top_k}; }

    std::uint64_t sampling_seed() const;
    std::uint64_t split_seed() const;
    std::uint64_t provider_seed() const;
    std::uint64_t train_shuffle_seed() const;

    /// Per-CVE sampling seed, independent of manifest order.
    std::uint64_t sampling_seed_for(const std::string& cve_id) const;

    /// Re-derives the dependent sub-seeds after `seed` changes. Call after
    /// applying overrides.
    void finalize() { train.seed = train_shuffle_seed(); }
};

/// Parses the flat key=value config format ('#' starts a comment). Unknown
/// keys raise FormatError with the line number.
PipelineConfig load_pipeline_config(const std::string& path);
void apply_config_line(PipelineConfig& cfg, const std::string& key, const std::string& value,
                       std::size_t line_no);

std::unique_ptr<EmbeddingProvider> make_provider(const PipelineConfig& cfg);

}  // namespace patchtrace
