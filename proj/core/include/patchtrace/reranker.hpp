#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "patchtrace/embed.hpp"
#include "patchtrace/hybrid.hpp"
#include "patchtrace/preprocess.hpp"
#include "patchtrace/types.hpp"

namespace patchtrace {

/// Concatenation of the pooled description embedding and the pooled commit
/// embedding; length is exactly twice the provider dimension.
struct PairFeature {
    std::vector<double> vector;
};

/// The trained correlation classifier: score = sigmoid(W . f + b).
struct LinearHead {
    std::vector<double> weights;  // 2 * provider dim
    double bias = 0.0;

    friend bool operator==(const LinearHead&, const LinearHead&) = default;
};

struct TrainConfig {
    std::size_t batch_size = 32;
    std::size_t max_epochs = 20;
    double learning_rate = 5e-5;
    std::uint64_t seed = 0;
    std::size_t early_stop_patience = 3;  // epochs without validation-loss improvement
};

struct EpochLoss {
    double train = 0.0;
    double validation = 0.0;  // NaN when no validation pairs were supplied
};

struct TrainResult {
    LinearHead head;
    std::vector<EpochLoss> history;
};

struct TrainingPair {
    PairFeature feature;
    int label = 0;  // 1 = patch, 0 = non-patch
};

PairFeature encode_pair(const std::vector<std::string>& desc_tokens,
                        const FormattedCommitSequence& commit_seq,
                        EmbeddingProvider& provider);

/// sigmoid(W . f + b), numerically stable and clamped into (0, 1).
double predict(const LinearHead& head, const PairFeature& f);

/// -(1/k) sum[y log p + (1-y) log(1-p)]. Lengths must match and be
/// non-empty.
double bce_loss(const std::vector<double>& predictions, const std::vector<int>& labels);

/// Mini-batch gradient descent on the BCE loss with the analytic gradient
/// dL/dW = (1/k) sum (p - y) f, dL/db = (1/k) sum (p - y). Deterministic
/// given cfg.seed (fixed shuffle order). Stops at max_epochs, or earlier
/// when the validation loss (training loss if validation is empty) fails
/// to improve for early_stop_patience consecutive epochs. Requires at
/// least one example of each class in train_pairs.
TrainResult train(const LinearHead& head,
                  const std::vector<TrainingPair>& train_pairs,
                  const std::vector<TrainingPair>& validation_pairs,
                  const TrainConfig& cfg);

/// Re-orders the phase-1 entries by predict score (same tie rule); the
/// entry set is unchanged and provenance becomes phase2.
RankedList rerank(const CveRecord& cve,
                  const RankedList& phase1,
                  const LinearHead& head,
                  const CommitIndex& commits,
                  EmbeddingProvider& provider);

// Head persistence: small text artifact with `dim`, `weights` (decimal,
// full precision), `bias`, `seed`, `config`; round-trip exact.

struct HeadArtifact {
    LinearHead head;
    std::uint64_t seed = 0;
    TrainConfig config;
};

void save_head(const HeadArtifact& artifact, std::ostream& out);
void save_head(const HeadArtifact& artifact, const std::string& path);
HeadArtifact load_head(std::istream& in);
HeadArtifact load_head(const std::string& path);

}  // namespace patchtrace
