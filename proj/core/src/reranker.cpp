#include "patchtrace/reranker.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "patchtrace/detail/rng.hpp"
#include "patchtrace/errors.hpp"

namespace patchtrace {

namespace {

double stable_sigmoid(double z) {
    double p;
    if (z >= 0.0) {
        p = 1.0 / (1.0 + std::exp(-z));
    } else {
        const double e = std::exp(z);
        p = e / (1.0 + e);
    }
    // the exponential saturates to exactly 0/1 in double for |z| > ~37;
    // keep the contractual open interval
    constexpr double lo = std::numeric_limits<double>::min();
    const double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2;
    return std::min(hi, std::max(lo, p));
}

double logit(const LinearHead& head, const PairFeature& f) {
    if (head.weights.size() != f.vector.size()) {
        throw Error("head/feature dimension mismatch: " + std::to_string(head.weights.size()) +
                    " vs " + std::to_string(f.vector.size()));
    }
    double z = head.bias;
    for (std::size_t i = 0; i < f.vector.size(); ++i) z += head.weights[i] * f.vector[i];
    return z;
}

// BCE term from the logit: softplus(-z) + (1-y) z, stable for large |z|.
double bce_from_logit(double z, int label) {
    const double softplus_neg = std::max(-z, 0.0) + std::log1p(std::exp(-std::abs(z)));
    return softplus_neg + (label ? 0.0 : z);
}

double mean_loss(const LinearHead& head, const std::vector<TrainingPair>& pairs) {
    double sum = 0.0;
    for (const auto& p : pairs) sum += bce_from_logit(logit(head, p.feature), p.label);
    return sum / static_cast<double>(pairs.size());
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

PairFeature encode_pair(const std::vector<std::string>& desc_tokens,
                        const FormattedCommitSequence& commit_seq,
                        EmbeddingProvider& provider) {
    const PooledEmbedding desc = provider.embed_pooled(desc_tokens);
    const PooledEmbedding commit = provider.embed_pooled(commit_seq.tokens);
    PairFeature f;
    f.vector.reserve(desc.dim() + commit.dim());
    f.vector.insert(f.vector.end(), desc.vector.begin(), desc.vector.end());
    f.vector.insert(f.vector.end(), commit.vector.begin(), commit.vector.end());
    return f;
}

double predict(const LinearHead& head, const PairFeature& f) {
    return stable_sigmoid(logit(head, f));
}

double bce_loss(const std::vector<double>& predictions, const std::vector<int>& labels) {
    if (predictions.empty()) throw Error("bce_loss requires non-empty input");
    if (predictions.size() != labels.size()) {
        throw Error("bce_loss length mismatch: " + std::to_string(predictions.size()) + " vs " +
                    std::to_string(labels.size()));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double p = predictions[i];
        sum -= labels[i] ? std::log(p) : std::log1p(-p);
    }
    return sum / static_cast<double>(predictions.size());
}

TrainResult train(const LinearHead& head,
                  const std::vector<TrainingPair>& train_pairs,
                  const std::vector<TrainingPair>& validation_pairs,
                  const TrainConfig& cfg) {
    if (cfg.batch_size < 1 || cfg.max_epochs < 1) {
        throw Error("batch_size and max_epochs must be at least 1");
    }
    bool has_pos = false, has_neg = false;
    for (const auto& p : train_pairs) (p.label ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg) {
        throw Error("training requires at least one example of each class");
    }
    const std::size_t dim = train_pairs.front().feature.vector.size();
    for (const auto& p : train_pairs) {
        if (p.feature.vector.size() != dim) throw Error("inconsistent feature dimensions");
    }

    TrainResult result;
    result.head = head;
    if (result.head.weights.empty()) result.head.weights.assign(dim, 0.0);
    if (result.head.weights.size() != dim) {
        throw Error("head/feature dimension mismatch: " +
                    std::to_string(result.head.weights.size()) + " vs " + std::to_string(dim));
    }

    std::vector<std::size_t> order(train_pairs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    detail::Rng shuffle_rng(cfg.seed);

    double best_monitored = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;
    std::vector<double> grad_w(dim);

    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        shuffle_rng.shuffle(order);

        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            const double inv_k = 1.0 / static_cast<double>(end - start);

            std::fill(grad_w.begin(), grad_w.end(), 0.0);
            double grad_b = 0.0;
            for (std::size_t i = start; i < end; ++i) {
                const TrainingPair& pair = train_pairs[order[i]];
                const double p = stable_sigmoid(logit(result.head, pair.feature));
                const double residual = p - static_cast<double>(pair.label);
                for (std::size_t d = 0; d < dim; ++d) {
                    grad_w[d] += residual * pair.feature.vector[d];
                }
                grad_b += residual;
            }
            for (std::size_t d = 0; d < dim; ++d) {
                result.head.weights[d] -= cfg.learning_rate * inv_k * grad_w[d];
            }
            result.head.bias -= cfg.learning_rate * inv_k * grad_b;
        }

        EpochLoss losses;
        losses.train = mean_loss(result.head, train_pairs);
        losses.validation = validation_pairs.empty()
                                ? std::numeric_limits<double>::quiet_NaN()
                                : mean_loss(result.head, validation_pairs);
        result.history.push_back(losses);

        const double monitored = validation_pairs.empty() ? losses.train : losses.validation;
        if (monitored < best_monitored) {
            best_monitored = monitored;
            since_best = 0;
        } else if (++since_best >= cfg.early_stop_patience) {
            break;
        }
    }
    return result;
}

RankedList rerank(const CveRecord& cve,
                  const RankedList& phase1,
                  const LinearHead& head,
                  const CommitIndex& commits,
                  EmbeddingProvider& provider) {
    if (phase1.entries.empty()) throw Error("rerank requires a non-empty phase-1 list");

    const std::vector<std::string> desc = description_tokens(cve.description);
    RankedList out;
    out.cve_id = phase1.cve_id;
    out.entries = phase1.entries;
    for (auto& entry : out.entries) {
        const Commit& commit = commits.at(entry.hash);
        const PairFeature f = encode_pair(desc, format_commit(commit), provider);
        entry.score = predict(head, f);
        entry.provenance = Provenance::phase2;
        entry.author_time = commit.author_time;
    }
    sort_ranked_entries(out.entries);
    return out;
}

void save_head(const HeadArtifact& artifact, std::ostream& out) {
    out << "dim " << artifact.head.weights.size() << '\n';
    out << "weights";
    for (double w : artifact.head.weights) out << ' ' << format_double(w);
    out << '\n';
    out << "bias " << format_double(artifact.head.bias) << '\n';
    out << "seed " << artifact.seed << '\n';
    out << "config batch_size=" << artifact.config.batch_size
        << " max_epochs=" << artifact.config.max_epochs
        << " learning_rate=" << format_double(artifact.config.learning_rate)
        << " early_stop_patience=" << artifact.config.early_stop_patience << '\n';
}

void save_head(const HeadArtifact& artifact, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open head file for writing: " + path);
    save_head(artifact, out);
    if (!out.good()) throw Error("failed writing head file: " + path);
}

HeadArtifact load_head(std::istream& in) {
    HeadArtifact artifact;
    std::string line;
    std::size_t line_no = 0;
    std::size_t dim = 0;
    bool saw_dim = false, saw_weights = false, saw_bias = false;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "dim") {
            if (!(ls >> dim)) throw FormatError("invalid dim line", line_no);
            saw_dim = true;
        } else if (key == "weights") {
            if (!saw_dim) throw FormatError("weights before dim", line_no);
            artifact.head.weights.resize(dim);
            for (std::size_t i = 0; i < dim; ++i) {
                if (!(ls >> artifact.head.weights[i])) {
                    throw FormatError("expected " + std::to_string(dim) + " weights", line_no);
                }
            }
            std::string extra;
            if (ls >> extra) throw FormatError("trailing weight values", line_no);
            saw_weights = true;
        } else if (key == "bias") {
            if (!(ls >> artifact.head.bias)) throw FormatError("invalid bias line", line_no);
            saw_bias = true;
        } else if (key == "seed") {
            if (!(ls >> artifact.seed)) throw FormatError("invalid seed line", line_no);
            artifact.config.seed = artifact.seed;
        } else if (key == "config") {
            std::string kv;
            while (ls >> kv) {
                std::size_t eq = kv.find('=');
                if (eq == std::string::npos) throw FormatError("invalid config entry: " + kv, line_no);
                const std::string name = kv.substr(0, eq);
                const std::string value = kv.substr(eq + 1);
                try {
                    if (name == "batch_size") artifact.config.batch_size = std::stoull(value);
                    else if (name == "max_epochs") artifact.config.max_epochs = std::stoull(value);
                    else if (name == "learning_rate") artifact.config.learning_rate = std::stod(value);
                    else if (name == "early_stop_patience") artifact.config.early_stop_patience = std::stoull(value);
                    else throw FormatError("unknown config entry: " + name, line_no);
                } catch (const FormatError&) {
                    throw;
                } catch (const std::exception&) {
                    throw FormatError("invalid config value: " + kv, line_no);
                }
            }
        } else {
            throw FormatError("unknown head-file key: " + key, line_no);
        }
    }
    if (!saw_dim || !saw_weights || !saw_bias) {
        throw FormatError("incomplete head file", line_no ? line_no : 1);
    }
    return artifact;
}

HeadArtifact load_head(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open head file: " + path);
    return load_head(in);
}

}  // namespace patchtrace
