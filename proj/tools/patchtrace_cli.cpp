// patchtrace: trace the security-patch commit for a disclosed vulnerability.
//
// Subcommands cover the whole pipeline: ingest a commit-log export plus a
// CVE manifest into a dataset, run the hybrid phase-1 retriever, train the
// phase-2 correlation head, re-rank, evaluate, and trace a single ad-hoc
// description.
//
// Exit codes: 0 success, 1 usage error, 2 data/provider error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "patchtrace/commit_log.hpp"
#include "patchtrace/corpus.hpp"
#include "patchtrace/dataset_io.hpp"
#include "patchtrace/errors.hpp"
#include "patchtrace/hybrid.hpp"
#include "patchtrace/metrics.hpp"
#include "patchtrace/pipeline.hpp"
#include "patchtrace/pipeline_config.hpp"
#include "patchtrace/preprocess.hpp"
#include "patchtrace/reranker.hpp"

namespace {

using namespace patchtrace;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

/// Config file path plus key=value overrides collected from flags; the
/// file (when given) is applied first, every flag wins over it.
struct ConfigArgs {
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;

    PipelineConfig build() const {
        PipelineConfig cfg;
        if (!config_path.empty()) cfg = load_pipeline_config(config_path);
        for (const auto& [key, value] : overrides) apply_config_line(cfg, key, value, 0);
        cfg.finalize();
        return cfg;
    }
};

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
    cmd->add_option("--config", args.config_path, "flat key=value config file");
    static const std::vector<std::pair<std::string, std::string>> keys = {
        {"--lambda", "lambda"},
        {"--top-k", "top_k"},
        {"--negative-sample-size", "negative_sample_size"},
        {"--k-list", "k_list"},
        {"--seed", "seed"},
        {"--provider", "provider"},
        {"--provider-dim", "provider_dim"},
        {"--endpoint", "endpoint"},
        {"--timeout-ms", "timeout_ms"},
        {"--batch-size", "batch_size"},
        {"--max-epochs", "max_epochs"},
        {"--learning-rate", "learning_rate"},
        {"--early-stop-patience", "early_stop_patience"},
    };
    for (const auto& [flag, key] : keys) {
        const std::string key_copy = key;
        cmd->add_option_function<std::string>(
               flag,
               [&args, key_copy](const std::string& value) {
                   args.overrides.emplace_back(key_copy, value);
               },
               "overrides config key " + key_copy)
            ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    }
}

CommitIndex load_corpus(const std::string& log_path) {
    return CommitIndex(ingest_commit_log_file(log_path));
}

std::vector<RankedList> load_phase1(const std::string& path, const CommitIndex& commits) {
    std::vector<RankedList> lists = load_ranked_lists(path);
    attach_author_times(lists, commits);
    return lists;
}

std::string first_line(const std::string& text) {
    std::size_t nl = text.find('\n');
    return nl == std::string::npos ? text : text.substr(0, nl);
}

int cmd_ingest(const std::string& log_path, const std::string& manifest_path,
               const std::string& out_path, const ConfigArgs& config_args) {
    const PipelineConfig cfg = config_args.build();
    const std::vector<Commit> commits = ingest_commit_log_file(log_path);
    std::vector<CveRecord> records = load_cve_manifest(manifest_path);

    IngestReport report = build_dataset(commits, std::move(records), cfg);
    for (const auto& w : report.warnings) std::cerr << w << '\n';
    save_dataset(report.dataset, out_path);

    std::cout << "dataset written to " << out_path << '\n'
              << "cves " << report.cve_count << '\n'
              << "commits " << report.commit_count << '\n'
              << "positives " << report.positive_count << '\n';
    return kExitOk;
}

int cmd_retrieve(const std::string& dataset_path, const std::string& log_path,
                 const std::string& out_path, const ConfigArgs& config_args) {
    const PipelineConfig cfg = config_args.build();
    const Dataset ds = load_dataset(dataset_path);
    const CommitIndex commits = load_corpus(log_path);
    auto provider = make_provider(cfg);

    const std::vector<RankedList> lists = phase1_rank_all(ds, commits, cfg, *provider);
    save_ranked_lists(lists, out_path);

    std::size_t covered = static_cast<std::size_t>(
        std::llround(phase1_coverage(ds, lists) * static_cast<double>(lists.size())));
    std::printf("phase-1 lists written to %s\n", out_path.c_str());
    std::printf("coverage %.6f (%zu/%zu CVEs with a patch in top-%zu)\n",
                phase1_coverage(ds, lists), covered, lists.size(), cfg.top_k);
    return kExitOk;
}

int cmd_train(const std::string& dataset_path, const std::string& log_path,
              const std::string& phase1_path, const std::string& out_path,
              const ConfigArgs& config_args) {
    const PipelineConfig cfg = config_args.build();
    const Dataset ds = load_dataset(dataset_path);
    const CommitIndex commits = load_corpus(log_path);
    auto provider = make_provider(cfg);

    const std::vector<RankedList> phase1 = load_phase1(phase1_path, commits);
    const std::vector<TrainingPair> train_pairs =
        build_training_pairs(ds, phase1, commits, Split::train, *provider);
    const std::vector<TrainingPair> val_pairs =
        build_training_pairs(ds, phase1, commits, Split::validation, *provider);

    TrainResult result = train(LinearHead{}, train_pairs, val_pairs, cfg.train);
    for (std::size_t i = 0; i < result.history.size(); ++i) {
        const EpochLoss& l = result.history[i];
        if (std::isnan(l.validation)) {
            std::printf("epoch %zu train_loss %.6f\n", i + 1, l.train);
        } else {
            std::printf("epoch %zu train_loss %.6f val_loss %.6f\n", i + 1, l.train,
                        l.validation);
        }
    }

    HeadArtifact artifact{result.head, cfg.train.seed, cfg.train};
    save_head(artifact, out_path);
    std::printf("head written to %s\n", out_path.c_str());
    return kExitOk;
}

int cmd_rerank(const std::string& dataset_path, const std::string& log_path,
               const std::string& phase1_path, const std::string& head_path,
               const std::string& out_path, const ConfigArgs& config_args) {
    const PipelineConfig cfg = config_args.build();
    const Dataset ds = load_dataset(dataset_path);
    const CommitIndex commits = load_corpus(log_path);
    auto provider = make_provider(cfg);

    const std::vector<RankedList> phase1 = load_phase1(phase1_path, commits);
    const HeadArtifact artifact = load_head(head_path);
    const std::vector<RankedList> phase2 =
        rerank_all(ds, phase1, artifact.head, commits, *provider);
    save_ranked_lists(phase2, out_path);
    std::printf("phase-2 lists written to %s\n", out_path.c_str());
    return kExitOk;
}

int cmd_evaluate(const std::string& dataset_path, const std::string& log_path,
                 const std::string& phase1_path, const std::string& head_path,
                 const std::string& report_path, const ConfigArgs& config_args) {
    const PipelineConfig cfg = config_args.build();
    const Dataset ds = load_dataset(dataset_path);
    const CommitIndex commits = load_corpus(log_path);

    const std::vector<RankedList> phase1 = load_phase1(phase1_path, commits);
    std::vector<const RankedList*> test_lists;
    for (const auto& rl : phase1) {
        auto sp = ds.split.find(rl.cve_id);
        if (sp != ds.split.end() && sp->second == Split::test) test_lists.push_back(&rl);
    }
    if (test_lists.empty()) throw Error("no ranked lists for the test split");

    MetricsReport report;
    report.k_list = cfg.k_list;
    report.variants.emplace_back("phase1", outcomes_for_split(ds, phase1, Split::test));

    if (head_path.empty() || !std::filesystem::exists(head_path)) {
        if (!head_path.empty()) {
            std::cout << "notice: head file " << head_path << " not found";
            std::cout << "; reporting phase-1 metrics only\n";
        } else {
            std::cout << "notice: no head supplied; reporting phase-1 metrics only\n";
        }
    } else {
        auto provider = make_provider(cfg);
        const HeadArtifact artifact = load_head(head_path);
        std::vector<RankedList> test_only;
        test_only.reserve(test_lists.size());
        for (const RankedList* rl : test_lists) test_only.push_back(*rl);
        const std::vector<RankedList> phase2 =
            rerank_all(ds, test_only, artifact.head, commits, *provider);
        report.variants.emplace_back("phase2", outcomes_for_split(ds, phase2, Split::test));
    }

    write_report_csv(report, report_path);
    std::cout << format_report_text(report);
    std::printf("report written to %s\n", report_path.c_str());
    return kExitOk;
}

int cmd_trace(const std::string& description, const std::string& log_path,
              const std::string& head_path, const ConfigArgs& config_args) {
    const PipelineConfig cfg = config_args.build();
    const CommitIndex commits = load_corpus(log_path);
    if (commits.empty()) throw Error("commit log is empty");
    auto provider = make_provider(cfg);

    CveRecord query;
    query.cve_id = "query";
    query.description = description;

    CandidateSet cs;
    cs.cve_id = query.cve_id;
    cs.candidates.reserve(commits.size());
    for (const auto& c : commits.commits()) cs.candidates.push_back(c.hash);

    RankedList ranked = retrieve_topk(query, cs, commits, cfg.hybrid(), *provider);
    if (!head_path.empty()) {
        const HeadArtifact artifact = load_head(head_path);
        ranked = rerank(query, ranked, artifact.head, commits, *provider);
    }

    const std::size_t shown = std::min<std::size_t>(10, ranked.entries.size());
    std::printf("rank  score     provenance  hash  message\n");
    for (std::size_t i = 0; i < shown; ++i) {
        const RankedEntry& e = ranked.entries[i];
        std::printf("%-4zu  %.6f  %-10s  %s  %s\n", i + 1, e.score, to_string(e.provenance),
                    e.hash.c_str(), first_line(commits.at(e.hash).message).c_str());
    }
    return kExitOk;
}

int cmd_tune_lambda(const std::string& dataset_path, const std::string& log_path,
                    const ConfigArgs& config_args) {
    const PipelineConfig cfg = config_args.build();
    const Dataset ds = load_dataset(dataset_path);
    const CommitIndex commits = load_corpus(log_path);
    auto provider = make_provider(cfg);

    std::vector<std::pair<CveRecord, CandidateSet>> validation;
    for (const auto& [cve_id, split] : ds.split) {
        if (split != Split::validation) continue;
        const CveRecord* record = ds.find_record(cve_id);
        auto cs = ds.candidate_sets.find(cve_id);
        if (record && cs != ds.candidate_sets.end()) validation.emplace_back(*record, cs->second);
    }
    if (validation.empty()) throw Error("validation split is empty");

    const double best =
        tune_lambda(validation, commits, cfg.hybrid(), default_lambda_grid(), *provider);
    std::printf("best_lambda %.2f\n", best);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"security-patch tracing for disclosed vulnerabilities"};
    app.require_subcommand(1);

    std::string log_path, manifest_path, dataset_path, phase1_path, head_path;
    std::string out_path, report_path, description;
    ConfigArgs config_args;

    auto* ingest = app.add_subcommand("ingest", "build a dataset from a commit log and manifest");
    ingest->add_option("--log", log_path, "commit-log export")->required();
    ingest->add_option("--manifest", manifest_path, "CVE manifest (JSON lines)")->required();
    ingest->add_option("--out", out_path, "dataset output path")->required();
    add_config_options(ingest, config_args);

    auto* retrieve = app.add_subcommand("retrieve", "phase-1 hybrid ranking for every CVE");
    retrieve->add_option("--dataset", dataset_path, "dataset path")->required();
    retrieve->add_option("--log", log_path, "commit-log export")->required();
    retrieve->add_option("--out", out_path, "ranked-list CSV output")->required();
    add_config_options(retrieve, config_args);

    auto* train = app.add_subcommand("train", "train the phase-2 correlation head");
    train->add_option("--dataset", dataset_path, "dataset path")->required();
    train->add_option("--log", log_path, "commit-log export")->required();
    train->add_option("--phase1", phase1_path, "phase-1 ranked-list CSV")->required();
    train->add_option("--out", out_path, "head output path")->required();
    add_config_options(train, config_args);

    auto* rerank_cmd = app.add_subcommand("rerank", "re-rank phase-1 lists with a trained head");
    rerank_cmd->add_option("--dataset", dataset_path, "dataset path")->required();
    rerank_cmd->add_option("--log", log_path, "commit-log export")->required();
    rerank_cmd->add_option("--phase1", phase1_path, "phase-1 ranked-list CSV")->required();
    rerank_cmd->add_option("--head", head_path, "trained head path")->required();
    rerank_cmd->add_option("--out", out_path, "ranked-list CSV output")->required();
    add_config_options(rerank_cmd, config_args);

    auto* evaluate = app.add_subcommand("evaluate", "metrics over the test split");
    evaluate->add_option("--dataset", dataset_path, "dataset path")->required();
    evaluate->add_option("--log", log_path, "commit-log export")->required();
    evaluate->add_option("--phase1", phase1_path, "phase-1 ranked-list CSV")->required();
    evaluate->add_option("--head", head_path, "trained head path (optional)");
    evaluate->add_option("--report", report_path, "metrics CSV output")->required();
    add_config_options(evaluate, config_args);

    auto* trace = app.add_subcommand("trace", "top-10 candidates for one description");
    trace->add_option("--description", description, "vulnerability description")->required();
    trace->add_option("--log", log_path, "commit-log export")->required();
    trace->add_option("--head", head_path, "trained head path (optional)");
    add_config_options(trace, config_args);

    auto* tune = app.add_subcommand("tune-lambda", "grid-search the fusion weight");
    tune->add_option("--dataset", dataset_path, "dataset path")->required();
    tune->add_option("--log", log_path, "commit-log export")->required();
    add_config_options(tune, config_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (ingest->parsed()) return cmd_ingest(log_path, manifest_path, out_path, config_args);
        if (retrieve->parsed()) {
            return cmd_retrieve(dataset_path, log_path, out_path, config_args);
        }
        if (train->parsed()) {
            return cmd_train(dataset_path, log_path, phase1_path, out_path, config_args);
        }
        if (rerank_cmd->parsed()) {
            return cmd_rerank(dataset_path, log_path, phase1_path, head_path, out_path,
                              config_args);
        }
        if (evaluate->parsed()) {
            return cmd_evaluate(dataset_path, log_path, phase1_path, head_path, report_path,
                                config_args);
        }
        if (trace->parsed()) {
            if (description.empty()) {
                std::cerr << "error: --description must not be empty\n";
                return kExitUsage;
            }
            return cmd_trace(description, log_path, head_path, config_args);
        }
        if (tune->parsed()) return cmd_tune_lambda(dataset_path, log_path, config_args);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}
