#include <cmath>
#include <optional>

#include <httplib.h>
#include <json.hpp>

#include "patchtrace/embed.hpp"
#include "patchtrace/errors.hpp"

namespace patchtrace {

namespace {

using nlohmann::json;

void normalize_in_place(std::vector<double>& v, const char* what) {
    double norm_sq = 0.0;
    for (double x : v) {
        if (!std::isfinite(x)) throw ProviderError(std::string(what) + ": non-finite coordinate");
        norm_sq += x * x;
    }
    const double norm = std::sqrt(norm_sq);
    if (norm < 1e-12) throw ProviderError(std::string(what) + ": zero-magnitude vector");
    for (double& x : v) x /= norm;
}

struct ParsedUrl {
    std::string host_port;  // scheme://host:port
    std::string path;       // leading path for the service, "" for root
};

ParsedUrl split_endpoint(const std::string& endpoint) {
    // httplib wants scheme://host:port and the request path separately.
    std::size_t scheme = endpoint.find("://");
    std::size_t path_start =
        scheme == std::string::npos ? endpoint.find('/') : endpoint.find('/', scheme + 3);
    if (path_start == std::string::npos) return {endpoint, ""};
    return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

}  // namespace

struct RemoteProvider::Impl {
    std::string endpoint;
    ParsedUrl url;
    int timeout_ms;
    httplib::Client client;
    std::mutex client_mutex;  // httplib clients are not safe for concurrent requests

    // Dimension is fixed by the first successful response.
    std::mutex dim_mutex;
    std::optional<std::size_t> dim;

    Impl(std::string ep, int timeout)
        : endpoint(std::move(ep)), url(split_endpoint(endpoint)), timeout_ms(timeout),
          client(url.host_port) {
        client.set_connection_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
        client.set_read_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
        client.set_write_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
    }

    std::size_t record_dim(std::size_t d) {
        std::lock_guard<std::mutex> lock(dim_mutex);
        if (!dim) {
            dim = d;
        } else if (*dim != d) {
            throw ProviderError("provider dimension changed from " + std::to_string(*dim) +
                                " to " + std::to_string(d));
        }
        return d;
    }

    json request(const std::vector<std::vector<std::string>>& sequences, const char* mode) {
        json body;
        body["sequences"] = sequences;
        body["mode"] = mode;
        const std::string path = url.path.empty() ? "/" : url.path;
        std::unique_lock<std::mutex> lock(client_mutex);
        auto res = client.Post(path, body.dump(), "application/json");
        lock.unlock();
        if (!res) {
            throw ProviderError("embedding endpoint unreachable: " + endpoint);
        }
        if (res->status < 200 || res->status >= 300) {
            throw ProviderError("embedding endpoint " + endpoint + " returned status " +
                                std::to_string(res->status));
        }
        try {
            return json::parse(res->body);
        } catch (const json::exception& e) {
            throw ProviderError(std::string("invalid embedding response: ") + e.what());
        }
    }
};

RemoteProvider::RemoteProvider(std::string endpoint, int timeout_ms)
    : impl_(std::make_unique<Impl>(std::move(endpoint), timeout_ms)) {}

RemoteProvider::~RemoteProvider() = default;

const std::string& RemoteProvider::endpoint() const { return impl_->endpoint; }

std::size_t RemoteProvider::dim() const {
    std::lock_guard<std::mutex> lock(impl_->dim_mutex);
    if (!impl_->dim) {
        throw ProviderError("provider dimension unknown before the first request");
    }
    return *impl_->dim;
}

TokenEmbeddings RemoteProvider::embed_tokens(const std::vector<std::string>& tokens) {
    if (tokens.empty()) throw Error("embed_tokens requires a non-empty token list");
    if (tokens.size() > 512) throw Error("embed_tokens accepts at most 512 tokens");

    json res = impl_->request({tokens}, "tokens");
    try {
        const std::size_t d = impl_->record_dim(res.at("dim").get<std::size_t>());
        const auto& vectors = res.at("vectors");
        if (vectors.size() != 1) {
            throw ProviderError("expected vectors for 1 sequence, got " +
                                std::to_string(vectors.size()));
        }
        std::vector<double> flat = vectors[0].get<std::vector<double>>();
        if (flat.size() != tokens.size() * d) {
            throw ProviderError("dimension mismatch: " + std::to_string(flat.size()) +
                                " values for " + std::to_string(tokens.size()) +
                                " tokens of dim " + std::to_string(d));
        }
        TokenEmbeddings emb;
        emb.dim = d;
        emb.data.resize(flat.size());
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            std::vector<double> row(flat.begin() + i * d, flat.begin() + (i + 1) * d);
            normalize_in_place(row, "token vector");
            std::copy(row.begin(), row.end(), emb.data.begin() + i * d);
        }
        return emb;
    } catch (const json::exception& e) {
        throw ProviderError(std::string("invalid embedding response: ") + e.what());
    }
}

PooledEmbedding RemoteProvider::embed_pooled(const std::vector<std::string>& tokens) {
    auto batch = embed_pooled_batch({tokens});
    return std::move(batch.front());
}

std::vector<PooledEmbedding> RemoteProvider::embed_pooled_batch(
    const std::vector<std::vector<std::string>>& sequences) {
    for (const auto& seq : sequences) {
        if (seq.empty()) throw Error("embed_pooled requires non-empty token lists");
        if (seq.size() > 512) throw Error("embed_pooled accepts at most 512 tokens");
    }
    std::vector<PooledEmbedding> out;
    out.reserve(sequences.size());

    for (std::size_t start = 0; start < sequences.size(); start += kMaxBatch) {
        const std::size_t end = std::min(sequences.size(), start + kMaxBatch);
        std::vector<std::vector<std::string>> chunk(sequences.begin() + start,
                                                    sequences.begin() + end);
        json res = impl_->request(chunk, "pooled");
        try {
            const std::size_t d = impl_->record_dim(res.at("dim").get<std::size_t>());
            const auto& vectors = res.at("vectors");
            if (vectors.size() != chunk.size()) {
                throw ProviderError("expected vectors for " + std::to_string(chunk.size()) +
                                    " sequences, got " + std::to_string(vectors.size()));
            }
            for (const auto& jv : vectors) {
                PooledEmbedding pooled;
                pooled.vector = jv.get<std::vector<double>>();
                if (pooled.vector.size() != d) {
                    throw ProviderError("dimension mismatch: pooled vector of size " +
                                        std::to_string(pooled.vector.size()) +
                                        ", provider dim " + std::to_string(d));
                }
                normalize_in_place(pooled.vector, "pooled vector");
                out.push_back(std::move(pooled));
            }
        } catch (const json::exception& e) {
            throw ProviderError(std::string("invalid embedding response: ") + e.what());
        }
    }
    return out;
}

}  // namespace patchtrace
