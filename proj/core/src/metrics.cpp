#include "patchtrace/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "patchtrace/errors.hpp"

namespace patchtrace {

namespace {

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace

RankOutcome rank_of_patch(const RankedList& rl, const std::unordered_set<std::string>& patch_ids) {
    if (patch_ids.empty()) throw Error("rank_of_patch requires a non-empty patch id set");
    RankOutcome outcome;
    outcome.cve_id = rl.cve_id;
    for (std::size_t i = 0; i < rl.entries.size(); ++i) {
        if (patch_ids.count(rl.entries[i].hash)) {
            outcome.first_relevant_rank = i + 1;
            break;
        }
    }
    return outcome;
}

double recall_at_k(const std::vector<RankOutcome>& outcomes, std::size_t k) {
    if (outcomes.empty()) throw Error("recall_at_k requires non-empty outcomes");
    if (k < 1) throw Error("recall_at_k requires K >= 1");
    std::size_t traced = 0;
    for (const auto& o : outcomes) {
        if (o.traced_within(k)) ++traced;
    }
    return static_cast<double>(traced) / static_cast<double>(outcomes.size());
}

double mrr(const std::vector<RankOutcome>& outcomes) {
    if (outcomes.empty()) throw Error("mrr requires non-empty outcomes");
    double sum = 0.0;
    for (const auto& o : outcomes) {
        if (o.first_relevant_rank) sum += 1.0 / static_cast<double>(*o.first_relevant_rank);
    }
    return sum / static_cast<double>(outcomes.size());
}

double manual_efforts_at_k(const std::vector<RankOutcome>& outcomes, std::size_t k) {
    if (outcomes.empty()) throw Error("manual_efforts_at_k requires non-empty outcomes");
    if (k < 1) throw Error("manual_efforts_at_k requires K >= 1");
    double sum = 0.0;
    for (const auto& o : outcomes) {
        const std::size_t effort = o.first_relevant_rank ? std::min(*o.first_relevant_rank, k) : k;
        sum += static_cast<double>(effort);
    }
    return sum / static_cast<double>(outcomes.size());
}

void write_report_csv(const MetricsReport& report, std::ostream& out) {
    out << "metric,K,value\n";
    for (const auto& [variant, outcomes] : report.variants) {
        for (std::size_t k : report.k_list) {
            out << variant << "_recall," << k << ',' << format_value(recall_at_k(outcomes, k))
                << '\n';
        }
        out << variant << "_mrr,," << format_value(mrr(outcomes)) << '\n';
        for (std::size_t k : report.k_list) {
            out << variant << "_manual_efforts," << k << ','
                << format_value(manual_efforts_at_k(outcomes, k)) << '\n';
        }
    }
}

void write_report_csv(const MetricsReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open report file for writing: " + path);
    write_report_csv(report, out);
    if (!out.good()) throw Error("failed writing report: " + path);
}

std::string format_report_text(const MetricsReport& report) {
    std::ostringstream out;
    out << "          K";
    for (const auto& [variant, _] : report.variants) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "  %10s", variant.c_str());
        out << buf;
    }
    out << '\n';

    auto table = [&](const char* title, auto&& metric) {
        out << title << '\n';
        for (std::size_t k : report.k_list) {
            char kbuf[32];
            std::snprintf(kbuf, sizeof(kbuf), "  K=%-7zu", k);
            out << kbuf;
            for (const auto& [variant, outcomes] : report.variants) {
                char buf[64];
                std::snprintf(buf, sizeof(buf), "  %10.4f", metric(outcomes, k));
                out << buf;
            }
            out << '\n';
        }
    };

    table("Recall@K", [](const std::vector<RankOutcome>& o, std::size_t k) {
        return recall_at_k(o, k);
    });
    table("Manual Efforts@K", [](const std::vector<RankOutcome>& o, std::size_t k) {
        return manual_efforts_at_k(o, k);
    });

    out << "MRR        ";
    for (const auto& [variant, outcomes] : report.variants) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "  %10.4f", mrr(outcomes));
        out << buf;
    }
    out << '\n';
    return out.str();
}

}  // namespace patchtrace
