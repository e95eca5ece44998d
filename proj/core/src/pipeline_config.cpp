#include "patchtrace/pipeline_config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "patchtrace/detail/rng.hpp"
#include "patchtrace/errors.hpp"

namespace patchtrace {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::size_t> parse_k_list(const std::string& value, std::size_t line_no) {
    std::vector<std::size_t> ks;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            ks.push_back(std::stoull(item));
        } catch (const std::exception&) {
            throw FormatError("invalid K value: " + item, line_no);
        }
    }
    if (ks.empty()) throw FormatError("k_list must not be empty", line_no);
    if (!std::is_sorted(ks.begin(), ks.end()) || ks.front() < 1) {
        throw FormatError("k_list must be ascending and >= 1", line_no);
    }
    return ks;
}

}  // namespace

std::uint64_t PipelineConfig::sampling_seed() const { return detail::subseed(seed, "sampling"); }
std::uint64_t PipelineConfig::split_seed() const { return detail::subseed(seed, "split"); }
std::uint64_t PipelineConfig::provider_seed() const { return detail::subseed(seed, "provider"); }
std::uint64_t PipelineConfig::train_shuffle_seed() const {
    return detail::subseed(seed, "train_shuffle");
}

std::uint64_t PipelineConfig::sampling_seed_for(const std::string& cve_id) const {
    std::uint64_t s = sampling_seed() ^ detail::fnv1a64(cve_id);
    return detail::splitmix64(s);
}

void apply_config_line(PipelineConfig& cfg, const std::string& key, const std::string& value,
                       std::size_t line_no) {
    try {
        if (key == "lambda") cfg.lambda = std::stod(value);
        else if (key == "top_k") cfg.top_k = std::stoull(value);
        else if (key == "negative_sample_size") cfg.negative_sample_size = std::stoull(value);
        else if (key == "k_list") cfg.k_list = parse_k_list(value, line_no);
        else if (key == "seed") cfg.seed = std::stoull(value);
        else if (key == "provider") {
            if (value == "builtin") cfg.provider = ProviderKind::builtin;
            else if (value == "remote") cfg.provider = ProviderKind::remote;
            else throw FormatError("provider must be 'builtin' or 'remote'", line_no);
        }
        else if (key == "provider_dim") cfg.provider_dim = std::stoull(value);
        else if (key == "endpoint") cfg.endpoint = value;
        else if (key == "timeout_ms") cfg.timeout_ms = std::stoi(value);
        else if (key == "batch_size") cfg.train.batch_size = std::stoull(value);
        else if (key == "max_epochs") cfg.train.max_epochs = std::stoull(value);
        else if (key == "learning_rate") cfg.train.learning_rate = std::stod(value);
        else if (key == "early_stop_patience") cfg.train.early_stop_patience = std::stoull(value);
        else throw FormatError("unknown config key: " + key, line_no);
    } catch (const FormatError&) {
        throw;
    } catch (const std::exception&) {
        throw FormatError("invalid value for " + key + ": " + value, line_no);
    }

    if (cfg.lambda < 0.0) throw FormatError("lambda must be >= 0", line_no);
    if (cfg.top_k < 1) throw FormatError("top_k must be >= 1", line_no);
    if (cfg.train.batch_size < 1) throw FormatError("batch_size must be >= 1", line_no);
    if (cfg.train.max_epochs < 1) throw FormatError("max_epochs must be >= 1", line_no);
    if (cfg.provider_dim < 1) throw FormatError("provider_dim must be >= 1", line_no);
}

PipelineConfig load_pipeline_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open config: " + path);

    PipelineConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t comment = line.find('#');
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw FormatError("expected key=value, got: " + line, line_no);
        }
        apply_config_line(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no);
    }
    cfg.finalize();
    return cfg;
}

std::unique_ptr<EmbeddingProvider> make_provider(const PipelineConfig& cfg) {
    if (cfg.provider == ProviderKind::remote) {
        return std::make_unique<RemoteProvider>(cfg.endpoint, cfg.timeout_ms);
    }
    return std::make_unique<BuiltinProvider>(cfg.provider_dim, cfg.provider_seed());
}

}  // namespace patchtrace
