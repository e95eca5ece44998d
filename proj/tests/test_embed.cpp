#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cmath>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "patchtrace/detail/rng.hpp"
#include "patchtrace/embed.hpp"
#include "patchtrace/errors.hpp"

using namespace patchtrace;
using nlohmann::json;

namespace {

double row_norm(const TokenEmbeddings& emb, std::size_t i) {
    double s = 0.0;
    for (double x : emb.row(i)) s += x * x;
    return std::sqrt(s);
}

double vec_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

/// In-process stub speaking the embedding wire protocol. Serves unit
/// vectors derived from token lengths; counts requests so batching is
/// observable.
class StubServer {
public:
    explicit StubServer(std::size_t dim) : dim_(dim) {
        server_.Post("/embed", [this](const httplib::Request& req, httplib::Response& res) {
            ++requests_;
            json body = json::parse(req.body);
            last_batch_ = body.at("sequences").size();
            max_batch_ = std::max(max_batch_, last_batch_);
            const std::string mode = body.at("mode");
            json vectors = json::array();
            for (const auto& seq : body.at("sequences")) {
                if (mode == "tokens") {
                    std::vector<double> flat;
                    for (const auto& tok : seq) {
                        auto v = vector_for(tok.get<std::string>());
                        flat.insert(flat.end(), v.begin(), v.end());
                    }
                    vectors.push_back(flat);
                } else {
                    std::vector<double> pooled(dim_, 0.0);
                    for (const auto& tok : seq) {
                        auto v = vector_for(tok.get<std::string>());
                        for (std::size_t d = 0; d < dim_; ++d) pooled[d] += v[d];
                    }
                    vectors.push_back(pooled);
                }
            }
            json out;
            out["dim"] = dim_;
            out["vectors"] = vectors;
            res.set_content(out.dump(), "application/json");
        });
        server_.Post("/broken", [](const httplib::Request&, httplib::Response& res) {
            res.status = 500;
            res.set_content("boom", "text/plain");
        });
        server_.Post("/badshape", [this](const httplib::Request& req, httplib::Response& res) {
            json body = json::parse(req.body);
            json out;
            out["dim"] = dim_;
            out["vectors"] = json::array();
            for (std::size_t i = 0; i < body.at("sequences").size(); ++i) {
                out["vectors"].push_back(std::vector<double>(dim_ + 3, 0.5));  // wrong size
            }
            res.set_content(out.dump(), "application/json");
        });

        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~StubServer() {
        server_.stop();
        thread_.join();
    }

    std::string endpoint(const std::string& path = "/embed") const {
        return "http://127.0.0.1:" + std::to_string(port_) + path;
    }
    std::size_t requests() const { return requests_; }
    std::size_t max_batch() const { return max_batch_; }

private:
    std::vector<double> vector_for(const std::string& token) {
        std::vector<double> v(dim_, 0.0);
        v[token.size() % dim_] = 1.0;
        return v;
    }

    std::size_t dim_;
    int port_ = 0;
    httplib::Server server_;
    std::thread thread_;
    std::atomic<std::size_t> requests_{0};
    std::size_t last_batch_ = 0;
    std::size_t max_batch_ = 0;
};

}  // namespace

TEST_CASE("builtin: identical tokens map to identical vectors") {
    BuiltinProvider provider(64, 17);
    auto a = provider.embed_tokens({"fix"});
    auto b = provider.embed_tokens({"fix"});
    CHECK(a.data == b.data);  // bit-identical

    // across provider instances with the same seed too
    BuiltinProvider fresh(64, 17);
    CHECK(fresh.embed_tokens({"fix"}).data == a.data);

    // a different seed moves the vector
    BuiltinProvider other(64, 18);
    CHECK(other.embed_tokens({"fix"}).data != a.data);
}

TEST_CASE("builtin: rows are unit-norm and distinct per token") {
    BuiltinProvider provider(8, 0);
    auto emb = provider.embed_tokens({"a", "b"});
    REQUIRE(emb.token_count() == 2);
    REQUIRE(emb.dim == 8);
    CHECK(row_norm(emb, 0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(row_norm(emb, 1) == doctest::Approx(1.0).epsilon(1e-6));
    std::vector<double> r0(emb.row(0).begin(), emb.row(0).end());
    std::vector<double> r1(emb.row(1).begin(), emb.row(1).end());
    CHECK(r0 != r1);
}

TEST_CASE("builtin: contract violations") {
    BuiltinProvider provider(16, 0);
    CHECK_THROWS_AS(provider.embed_tokens({}), Error);
    CHECK_THROWS_AS(provider.embed_pooled({}), Error);
    std::vector<std::string> too_many(513, "x");
    CHECK_THROWS_AS(provider.embed_tokens(too_many), Error);
}

TEST_CASE("builtin pooled: single token, permutation insensitivity, norm") {
    BuiltinProvider provider(32, 5);
    auto single = provider.embed_pooled({"alpha"});
    auto tokens = provider.embed_tokens({"alpha"});
    for (std::size_t d = 0; d < 32; ++d) {
        CHECK(single.vector[d] == doctest::Approx(tokens.row(0)[d]).epsilon(1e-9));
    }

    // mean pooling is order-insensitive for the builtin provider
    auto ab = provider.embed_pooled({"a", "b"});
    auto ba = provider.embed_pooled({"b", "a"});
    for (std::size_t d = 0; d < 32; ++d) {
        CHECK(ab.vector[d] == doctest::Approx(ba.vector[d]).epsilon(1e-12));
    }

    detail::Rng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::string> tokens_list;
        const std::size_t len = 1 + rng.bounded(20);
        for (std::size_t i = 0; i < len; ++i) {
            tokens_list.push_back("w" + std::to_string(rng.bounded(50)));
        }
        CHECK(vec_norm(provider.embed_pooled(tokens_list).vector) ==
              doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("builtin: dimension consistency across calls") {
    BuiltinProvider provider(24, 3);
    CHECK(provider.dim() == 24);
    CHECK(provider.embed_tokens({"x"}).dim == 24);
    CHECK(provider.embed_pooled({"x", "y"}).dim() == 24);
}

TEST_CASE("remote: tokens and pooled round trip through the wire protocol") {
    StubServer server(8);
    RemoteProvider provider(server.endpoint());

    auto emb = provider.embed_tokens({"ab", "abc"});
    REQUIRE(emb.dim == 8);
    REQUIRE(emb.token_count() == 2);
    // stub emits basis vector e[len % dim]; normalization keeps it
    CHECK(emb.row(0)[2] == doctest::Approx(1.0));
    CHECK(emb.row(1)[3] == doctest::Approx(1.0));
    CHECK(provider.dim() == 8);

    auto pooled = provider.embed_pooled({"ab", "ab"});
    CHECK(vec_norm(pooled.vector) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(pooled.vector[2] == doctest::Approx(1.0));
}

TEST_CASE("remote: batches of at most 64 sequences") {
    StubServer server(4);
    RemoteProvider provider(server.endpoint());

    std::vector<std::vector<std::string>> sequences(130, {"tok"});
    auto pooled = provider.embed_pooled_batch(sequences);
    CHECK(pooled.size() == 130);
    CHECK(server.requests() == 3);  // 64 + 64 + 2
    CHECK(server.max_batch() == 64);
}

TEST_CASE("remote: non-2xx and malformed shapes raise ProviderError") {
    StubServer server(8);

    RemoteProvider broken(server.endpoint("/broken"));
    CHECK_THROWS_AS(broken.embed_tokens({"x"}), ProviderError);

    RemoteProvider badshape(server.endpoint("/badshape"));
    CHECK_THROWS_AS(badshape.embed_pooled({"x"}), ProviderError);

    RemoteProvider unreachable("http://127.0.0.1:1", 200);
    CHECK_THROWS_AS(unreachable.embed_tokens({"x"}), ProviderError);
}
