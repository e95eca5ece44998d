#include "patchtrace/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <unordered_set>

#include "patchtrace/corpus.hpp"
#include "patchtrace/errors.hpp"

namespace patchtrace {

namespace {

std::unordered_set<std::string> patch_id_set(const CveRecord& r) {
    return {r.patch_commit_ids.begin(), r.patch_commit_ids.end()};
}

/// Runs fn(0..n-1) across a small thread pool. Work items are independent
/// and write to index-addressed slots, so the output order is deterministic
/// regardless of scheduling. The lowest-index exception is rethrown.
void parallel_for_index(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const std::size_t hw = std::thread::hardware_concurrency();
    const std::size_t workers = std::min({n, hw == 0 ? std::size_t{1} : hw, std::size_t{8}});
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::size_t error_index = n;
    std::exception_ptr error;

    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (i < error_index) {
                    error_index = i;
                    error = std::current_exception();
                }
            }
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) threads.emplace_back(body);
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace

IngestReport build_dataset(const std::vector<Commit>& commits,
                           std::vector<CveRecord> records,
                           const PipelineConfig& cfg) {
    IngestReport report;
    report.commit_count = commits.size();

    std::unordered_set<std::string> known_hashes;
    known_hashes.reserve(commits.size());
    for (const auto& c : commits) known_hashes.insert(c.hash);

    std::vector<CveRecord> kept;
    for (auto& r : records) {
        std::sort(r.patch_commit_ids.begin(), r.patch_commit_ids.end());
        r.patch_commit_ids.erase(
            std::unique(r.patch_commit_ids.begin(), r.patch_commit_ids.end()),
            r.patch_commit_ids.end());

        std::unordered_set<std::string> resolved;
        for (const auto& id : r.patch_commit_ids) {
            if (known_hashes.count(id)) {
                resolved.insert(id);
            } else {
                report.warnings.push_back("warning: " + r.cve_id + ": patch commit " + id +
                                          " not found in the log");
            }
        }
        if (resolved.empty()) {
            report.warnings.push_back("notice: " + r.cve_id +
                                      " skipped: no patch commit resolves against the log");
            continue;
        }

        CandidateSet cs = sample_negatives(commits, resolved, cfg.negative_sample_size,
                                           cfg.sampling_seed_for(r.cve_id), r.cve_id);
        report.positive_count += cs.patch_labels.size();
        report.dataset.candidate_sets.emplace(r.cve_id, std::move(cs));
        kept.push_back(std::move(r));
    }

    report.dataset.split = split_dataset(kept, {8, 1, 1}, cfg.split_seed());
    report.dataset.records = std::move(kept);
    report.cve_count = report.dataset.records.size();
    return report;
}

std::vector<RankedList> phase1_rank_all(const Dataset& ds,
                                        const CommitIndex& commits,
                                        const PipelineConfig& cfg,
                                        EmbeddingProvider& provider) {
    std::vector<std::pair<const CveRecord*, const CandidateSet*>> work;
    work.reserve(ds.candidate_sets.size());
    for (const auto& [cve_id, cs] : ds.candidate_sets) {  // std::map: ascending cve_id
        const CveRecord* record = ds.find_record(cve_id);
        if (!record) throw Error("candidate set without a CVE record: " + cve_id);
        work.emplace_back(record, &cs);
    }

    std::vector<RankedList> lists(work.size());
    parallel_for_index(work.size(), [&](std::size_t i) {
        lists[i] = retrieve_topk(*work[i].first, *work[i].second, commits, cfg.hybrid(),
                                 provider);
    });
    return lists;
}

double phase1_coverage(const Dataset& ds, const std::vector<RankedList>& lists) {
    if (lists.empty()) return 0.0;
    std::size_t covered = 0;
    for (const auto& rl : lists) {
        const CveRecord* record = ds.find_record(rl.cve_id);
        if (!record) continue;
        const auto patches = patch_id_set(*record);
        for (const auto& e : rl.entries) {
            if (patches.count(e.hash)) {
                ++covered;
                break;
            }
        }
    }
    return static_cast<double>(covered) / static_cast<double>(lists.size());
}

std::vector<TrainingPair> build_training_pairs(const Dataset& ds,
                                               const std::vector<RankedList>& phase1,
                                               const CommitIndex& commits,
                                               Split split,
                                               EmbeddingProvider& provider) {
    std::vector<TrainingPair> pairs;
    for (const auto& rl : phase1) {
        auto sp = ds.split.find(rl.cve_id);
        if (sp == ds.split.end() || sp->second != split) continue;
        const CveRecord* record = ds.find_record(rl.cve_id);
        if (!record) continue;

        const auto patches = patch_id_set(*record);
        const std::vector<std::string> desc = description_tokens(record->description);
        for (const auto& entry : rl.entries) {
            TrainingPair pair;
            pair.feature = encode_pair(desc, format_commit(commits.at(entry.hash)), provider);
            pair.label = patches.count(entry.hash) ? 1 : 0;
            pairs.push_back(std::move(pair));
        }
    }
    return pairs;
}

std::vector<RankedList> rerank_all(const Dataset& ds,
                                   const std::vector<RankedList>& phase1,
                                   const LinearHead& head,
                                   const CommitIndex& commits,
                                   EmbeddingProvider& provider) {
    std::vector<const CveRecord*> records;
    records.reserve(phase1.size());
    for (const auto& rl : phase1) {
        const CveRecord* record = ds.find_record(rl.cve_id);
        if (!record) throw Error("ranked list without a CVE record: " + rl.cve_id);
        records.push_back(record);
    }

    std::vector<RankedList> out(phase1.size());
    parallel_for_index(phase1.size(), [&](std::size_t i) {
        out[i] = rerank(*records[i], phase1[i], head, commits, provider);
    });
    return out;
}

std::vector<RankOutcome> outcomes_for_split(const Dataset& ds,
                                            const std::vector<RankedList>& lists,
                                            Split split) {
    std::vector<const RankedList*> selected;
    for (const auto& rl : lists) {
        auto sp = ds.split.find(rl.cve_id);
        if (sp != ds.split.end() && sp->second == split) selected.push_back(&rl);
    }
    std::sort(selected.begin(), selected.end(),
              [](const RankedList* a, const RankedList* b) { return a->cve_id < b->cve_id; });

    std::vector<RankOutcome> outcomes;
    outcomes.reserve(selected.size());
    for (const RankedList* rl : selected) {
        const CveRecord* record = ds.find_record(rl->cve_id);
        if (!record) continue;
        outcomes.push_back(rank_of_patch(*rl, patch_id_set(*record)));
    }
    return outcomes;
}

}  // namespace patchtrace
