#include "patchtrace/hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "patchtrace/errors.hpp"
#include "patchtrace/lexical.hpp"
#include "patchtrace/preprocess.hpp"
#include "patchtrace/semantic.hpp"

namespace patchtrace {

namespace {

bool entry_order(const RankedEntry& a, const RankedEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.author_time != b.author_time) return a.author_time > b.author_time;
    return a.hash < b.hash;
}

struct ComponentScores {
    std::vector<RankedEntry> entries;  // score field unused here
    std::vector<double> semantic;      // F1 per candidate
    std::vector<double> lexical;       // cosine per candidate
};

/// Semantic and lexical scores for every candidate of one CVE, computed
/// once so rankings under several lambdas can reuse them.
ComponentScores component_scores(const CveRecord& cve,
                                 const CandidateSet& cs,
                                 const CommitIndex& commits,
                                 EmbeddingProvider& provider) {
    ComponentScores out;
    const std::vector<std::string> desc = description_tokens(cve.description);

    std::vector<std::vector<std::string>> lexical_docs;
    std::vector<FormattedCommitSequence> sequences;
    lexical_docs.reserve(cs.candidates.size());
    sequences.reserve(cs.candidates.size());
    out.entries.reserve(cs.candidates.size());

    for (const auto& hash : cs.candidates) {
        const Commit& commit = commits.at(hash);
        lexical_docs.push_back(commit_lexical_tokens(commit));
        sequences.push_back(format_commit(commit));
        out.entries.push_back(RankedEntry{hash, 0.0, Provenance::phase1, commit.author_time});
    }

    out.lexical = desc.empty() ? std::vector<double>(cs.candidates.size(), 0.0)
                               : lexical_scores(desc, lexical_docs);
    if (desc.empty()) {
        out.semantic.assign(cs.candidates.size(), 0.0);
    } else {
        try {
            out.semantic = semantic_scores(desc, sequences, provider);
        } catch (const CandidateProviderError& e) {
            throw PartialResultError(e.what(), e.candidate_index());
        } catch (const ProviderError& e) {
            throw PartialResultError(e.what(), 0);
        }
    }
    return out;
}

RankedList rank_from_components(const std::string& cve_id,
                                const ComponentScores& scores,
                                double lambda,
                                std::size_t top_k) {
    RankedList rl;
    rl.cve_id = cve_id;
    rl.entries = scores.entries;
    for (std::size_t i = 0; i < rl.entries.size(); ++i) {
        rl.entries[i].score = fuse(scores.semantic[i], scores.lexical[i], lambda);
    }
    sort_ranked_entries(rl.entries);
    if (rl.entries.size() > top_k) rl.entries.resize(top_k);
    return rl;
}

std::string format_score(double score) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", score);
    return buf;
}

}  // namespace

const char* to_string(Provenance p) { return p == Provenance::phase1 ? "phase1" : "phase2"; }

Provenance provenance_from_string(const std::string& s) {
    if (s == "phase1") return Provenance::phase1;
    if (s == "phase2") return Provenance::phase2;
    throw Error("unknown provenance: " + s);
}

void sort_ranked_entries(std::vector<RankedEntry>& entries) {
    std::sort(entries.begin(), entries.end(), entry_order);
}

double fuse(double sim, double cos, double lambda) { return sim + lambda * cos; }

RankedList retrieve_topk(const CveRecord& cve,
                         const CandidateSet& cs,
                         const CommitIndex& commits,
                         const HybridConfig& cfg,
                         EmbeddingProvider& provider) {
    const ComponentScores scores = component_scores(cve, cs, commits, provider);
    return rank_from_components(cve.cve_id, scores, cfg.lambda, cfg.top_k);
}

std::vector<double> default_lambda_grid() {
    std::vector<double> grid;
    grid.reserve(199);
    for (int i = 0; i <= 198; ++i) grid.push_back((i + 2) / 20.0);  // 0.10 .. 10.00
    return grid;
}

double tune_lambda(const std::vector<std::pair<CveRecord, CandidateSet>>& validation,
                   const CommitIndex& commits,
                   const HybridConfig& cfg,
                   const std::vector<double>& grid,
                   EmbeddingProvider& provider) {
    if (validation.empty()) throw Error("tune_lambda requires a non-empty validation set");
    if (grid.empty()) throw Error("tune_lambda requires a non-empty grid");

    std::vector<ComponentScores> per_cve;
    per_cve.reserve(validation.size());
    for (const auto& [cve, cs] : validation) {
        per_cve.push_back(component_scores(cve, cs, commits, provider));
    }

    double best_lambda = grid.front();
    double best_recall = -1.0;
    for (double lambda : grid) {
        std::size_t traced = 0;
        for (std::size_t i = 0; i < validation.size(); ++i) {
            RankedList rl = rank_from_components(validation[i].first.cve_id, per_cve[i],
                                                 lambda, cfg.top_k);
            for (const auto& e : rl.entries) {
                if (validation[i].second.is_patch(e.hash)) {
                    ++traced;
                    break;
                }
            }
        }
        const double recall = static_cast<double>(traced) / static_cast<double>(validation.size());
        if (recall > best_recall) {  // strict: ties keep the smaller lambda
            best_recall = recall;
            best_lambda = lambda;
        }
    }
    return best_lambda;
}

void save_ranked_lists(const std::vector<RankedList>& lists, std::ostream& out) {
    out << "cve_id,rank,hash,score,provenance\n";
    std::vector<const RankedList*> ordered;
    ordered.reserve(lists.size());
    for (const auto& rl : lists) ordered.push_back(&rl);
    std::sort(ordered.begin(), ordered.end(),
              [](const RankedList* a, const RankedList* b) { return a->cve_id < b->cve_id; });

    for (const RankedList* rl : ordered) {
        for (std::size_t i = 0; i < rl->entries.size(); ++i) {
            const RankedEntry& e = rl->entries[i];
            if (rl->cve_id.find(',') != std::string::npos ||
                e.hash.find(',') != std::string::npos) {
                throw Error("cve_id/hash fields must not contain commas");
            }
            out << rl->cve_id << ',' << (i + 1) << ',' << e.hash << ',' << format_score(e.score)
                << ',' << to_string(e.provenance) << '\n';
        }
    }
}

void save_ranked_lists(const std::vector<RankedList>& lists, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open ranked-list file for writing: " + path);
    save_ranked_lists(lists, out);
    if (!out.good()) throw Error("failed writing ranked lists: " + path);
}

std::vector<RankedList> load_ranked_lists(std::istream& in) {
    std::vector<RankedList> lists;
    std::unordered_set<std::string> closed;
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) throw FormatError("missing ranked-list header", 1);
    ++line_no;
    if (line != "cve_id,rank,hash,score,provenance") {
        throw FormatError("unexpected ranked-list header: " + line, line_no);
    }

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t pos = 0;
        while (fields.size() < 4) {
            std::size_t comma = line.find(',', pos);
            if (comma == std::string::npos) break;
            fields.push_back(line.substr(pos, comma - pos));
            pos = comma + 1;
        }
        fields.push_back(line.substr(pos));
        if (fields.size() != 5) throw FormatError("expected 5 CSV fields", line_no);

        RankedEntry entry;
        entry.hash = fields[2];
        std::size_t rank = 0;
        try {
            rank = static_cast<std::size_t>(std::stoull(fields[1]));
            entry.score = std::stod(fields[3]);
            entry.provenance = provenance_from_string(fields[4]);
        } catch (const Error& e) {
            throw FormatError(e.what(), line_no);
        } catch (const std::exception&) {
            throw FormatError("malformed ranked-list record: " + line, line_no);
        }

        if (lists.empty() || lists.back().cve_id != fields[0]) {
            if (rank != 1) throw FormatError("ranked list must start at rank 1", line_no);
            if (!closed.insert(fields[0]).second) {
                throw FormatError("duplicate ranked list for " + fields[0], line_no);
            }
            lists.push_back(RankedList{fields[0], {}});
        } else if (rank != lists.back().entries.size() + 1) {
            throw FormatError("non-contiguous rank " + fields[1], line_no);
        }
        lists.back().entries.push_back(std::move(entry));
    }
    return lists;
}

std::vector<RankedList> load_ranked_lists(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open ranked-list file: " + path);
    return load_ranked_lists(in);
}

void attach_author_times(std::vector<RankedList>& lists, const CommitIndex& commits) {
    for (auto& rl : lists) {
        for (auto& e : rl.entries) {
            if (const Commit* c = commits.find(e.hash)) e.author_time = c->author_time;
        }
    }
}

}  // namespace patchtrace
