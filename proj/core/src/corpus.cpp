#include "patchtrace/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "patchtrace/detail/rng.hpp"
#include "patchtrace/errors.hpp"

namespace patchtrace {

CandidateSet sample_negatives(const std::vector<Commit>& corpus,
                              const std::unordered_set<std::string>& patch_ids,
                              std::size_t n,
                              std::uint64_t seed,
                              std::string cve_id) {
    CandidateSet cs;
    cs.cve_id = std::move(cve_id);

    std::vector<std::size_t> negative_indices;
    negative_indices.reserve(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const std::string& hash = corpus[i].hash;
        if (patch_ids.count(hash)) {
            if (!cs.patch_labels.count(hash)) {
                cs.candidates.push_back(hash);
                cs.patch_labels.insert(hash);
            }
        } else {
            negative_indices.push_back(i);
        }
    }

    // partial Fisher-Yates: the first `take` slots are the sample
    const std::size_t take = std::min(n, negative_indices.size());
    detail::Rng rng(seed);
    for (std::size_t i = 0; i < take; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.bounded(negative_indices.size() - i));
        std::swap(negative_indices[i], negative_indices[j]);
        cs.candidates.push_back(corpus[negative_indices[i]].hash);
    }
    return cs;
}

std::map<std::string, Split> split_dataset(const std::vector<CveRecord>& records,
                                           const std::array<std::uint32_t, 3>& ratios,
                                           std::uint64_t seed) {
    if (ratios[0] == 0 || ratios[1] == 0 || ratios[2] == 0) {
        throw Error("split ratios must be positive");
    }

    std::vector<std::string> ids;
    ids.reserve(records.size());
    for (const auto& r : records) ids.push_back(r.cve_id);
    std::sort(ids.begin(), ids.end());  // shuffle from a canonical order
    detail::Rng rng(seed);
    rng.shuffle(ids);

    const std::size_t total = ids.size();
    std::size_t val_n, test_n;
    if (total < 3) {
        // fewer records than buckets: one per bucket in (train, val, test) order
        val_n = total >= 2 ? 1 : 0;
        test_n = 0;
    } else {
        const double whole = static_cast<double>(ratios[0] + ratios[1] + ratios[2]);
        val_n = static_cast<std::size_t>(std::llround(total * (ratios[1] / whole)));
        test_n = static_cast<std::size_t>(std::llround(total * (ratios[2] / whole)));
        while (val_n + test_n > total) (val_n > test_n ? val_n : test_n) -= 1;
    }
    const std::size_t train_n = total - val_n - test_n;

    std::map<std::string, Split> split;
    for (std::size_t i = 0; i < total; ++i) {
        Split s = i < train_n                ? Split::train
                  : i < train_n + val_n      ? Split::validation
                                             : Split::test;
        split.emplace(ids[i], s);
    }
    return split;
}

}  // namespace patchtrace
