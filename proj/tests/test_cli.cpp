#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include "patchtrace/commit_log.hpp"
#include "patchtrace/dataset_io.hpp"
#include "patchtrace/hybrid.hpp"
#include "patchtrace/pipeline.hpp"
#include "patchtrace/pipeline_config.hpp"

#include "support/synthetic.hpp"

using namespace patchtrace;
using testsupport::CommandResult;
using testsupport::quote_arg;
using testsupport::TempDir;

namespace {

const std::string kCli = PATCHTRACE_CLI_PATH;

CommandResult cli(const std::string& args) { return testsupport::run_command(kCli + " " + args); }

std::string manifest_json(const std::vector<CveRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        nlohmann::json j;
        j["cve_id"] = r.cve_id;
        j["description"] = r.description;
        j["repo_id"] = r.repo_id;
        j["patch_commit_ids"] = r.patch_commit_ids;
        out += j.dump() + "\n";
    }
    return out;
}

/// A small planted corpus on disk, ingested once for the whole suite.
struct Fixture {
    TempDir dir{"patchtrace-cli"};
    testsupport::SyntheticCorpus corpus;
    std::string log_path, manifest_path, dataset_path;
    std::string common;  // flags shared by every pipeline invocation

    Fixture() {
        corpus = testsupport::make_planted_corpus(90210, 120, 10);
        log_path = dir.file("commits.log");
        manifest_path = dir.file("manifest.jsonl");
        dataset_path = dir.file("dataset.jsonl");
        testsupport::write_file(log_path, serialize_commit_log(corpus.commits));
        testsupport::write_file(manifest_path, manifest_json(corpus.records));
        common = " --seed 7 --provider-dim 32 --top-k 20 --negative-sample-size 80";

        auto r = cli("ingest --log " + quote_arg(log_path) + " --manifest " +
                     quote_arg(manifest_path) + " --out " + quote_arg(dataset_path) + common);
        REQUIRE(r.exit_code == 0);
    }

    PipelineConfig config() const {
        PipelineConfig cfg;
        cfg.seed = 7;
        cfg.provider_dim = 32;
        cfg.top_k = 20;
        cfg.negative_sample_size = 80;
        cfg.finalize();
        return cfg;
    }
};

Fixture& fixture() {
    static Fixture f;
    return f;
}

}  // namespace

TEST_CASE("ingest: summary and loadable dataset") {
    Fixture& f = fixture();
    auto r = cli("ingest --log " + quote_arg(f.log_path) + " --manifest " +
                 quote_arg(f.manifest_path) + " --out " + quote_arg(f.dir.file("ds2.jsonl")) +
                 f.common);
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("cves 10") != std::string::npos);
    CHECK(r.output.find("commits 120") != std::string::npos);
    CHECK(r.output.find("positives 10") != std::string::npos);

    Dataset ds = load_dataset(f.dir.file("ds2.jsonl"));
    CHECK(ds.records.size() == 10);
    for (const auto& [cve_id, cs] : ds.candidate_sets) {
        CHECK(cs.candidates.size() == 81);  // 80 negatives + 1 patch
        CHECK(cs.patch_labels.size() == 1);
    }
}

TEST_CASE("ingest: missing patch hashes warn; unresolvable CVEs are skipped") {
    Fixture& f = fixture();
    std::vector<CveRecord> records = f.corpus.records;
    records[0].patch_commit_ids.push_back("feedfacefeedfacefeedfacefeedfacefeedface");
    records[1].patch_commit_ids = {"0000000000000000000000000000000000000000"};

    const std::string manifest2 = f.dir.file("manifest2.jsonl");
    testsupport::write_file(manifest2, manifest_json(records));
    auto r = cli("ingest --log " + quote_arg(f.log_path) + " --manifest " + quote_arg(manifest2) +
                 " --out " + quote_arg(f.dir.file("ds3.jsonl")) + f.common);
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("feedface") != std::string::npos);         // missing hash named
    CHECK(r.output.find(records[1].cve_id) != std::string::npos);  // skipped CVE named
    CHECK(r.output.find("skipped") != std::string::npos);
    CHECK(r.output.find("cves 9") != std::string::npos);  // CVE 0 retained, CVE 1 gone

    Dataset ds = load_dataset(f.dir.file("ds3.jsonl"));
    CHECK(ds.records.size() == 9);
    CHECK(ds.candidate_sets.count(records[1].cve_id) == 0);
}

TEST_CASE("retrieve: coverage line, loadable lists, CLI equals library") {
    Fixture& f = fixture();
    const std::string out = f.dir.file("phase1.csv");
    auto r = cli("retrieve --dataset " + quote_arg(f.dataset_path) + " --log " +
                 quote_arg(f.log_path) + " --out " + quote_arg(out) + f.common);
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("coverage 1.000000") != std::string::npos);

    auto lists = load_ranked_lists(out);
    REQUIRE(lists.size() == 10);
    for (const auto& rl : lists) CHECK(rl.entries.size() == 20);

    // no CLI-layer arithmetic: the file equals the library composition
    PipelineConfig cfg = f.config();
    Dataset ds = load_dataset(f.dataset_path);
    CommitIndex commits(ingest_commit_log_file(f.log_path));
    auto provider = make_provider(cfg);
    std::ostringstream expected;
    save_ranked_lists(phase1_rank_all(ds, commits, cfg, *provider), expected);
    CHECK(testsupport::read_file(out) == expected.str());
}

TEST_CASE("retrieve: top_k beyond the candidate count returns full lists") {
    Fixture& f = fixture();
    const std::string out = f.dir.file("phase1-full.csv");
    auto r = cli("retrieve --dataset " + quote_arg(f.dataset_path) + " --log " +
                 quote_arg(f.log_path) + " --out " + quote_arg(out) + f.common +
                 " --top-k 100000");
    REQUIRE(r.exit_code == 0);
    for (const auto& rl : load_ranked_lists(out)) CHECK(rl.entries.size() == 81);
}

TEST_CASE("train: loss curve, determinism, persisted head") {
    Fixture& f = fixture();
    const std::string phase1 = f.dir.file("phase1-train.csv");
    REQUIRE(cli("retrieve --dataset " + quote_arg(f.dataset_path) + " --log " +
                quote_arg(f.log_path) + " --out " + quote_arg(phase1) + f.common)
                .exit_code == 0);

    const std::string head_a = f.dir.file("head-a.txt");
    const std::string head_b = f.dir.file("head-b.txt");
    const std::string train_flags = " --learning-rate 0.5 --max-epochs 6";
    auto r = cli("train --dataset " + quote_arg(f.dataset_path) + " --log " +
                 quote_arg(f.log_path) + " --phase1 " + quote_arg(phase1) + " --out " +
                 quote_arg(head_a) + f.common + train_flags);
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("epoch 1 train_loss") != std::string::npos);
    CHECK(r.output.find("val_loss") != std::string::npos);

    SUBCASE("same seed twice gives identical head files") {
        auto r2 = cli("train --dataset " + quote_arg(f.dataset_path) + " --log " +
                      quote_arg(f.log_path) + " --phase1 " + quote_arg(phase1) + " --out " +
                      quote_arg(head_b) + f.common + train_flags);
        REQUIRE(r2.exit_code == 0);
        CHECK(testsupport::read_file(head_a) == testsupport::read_file(head_b));
    }
    SUBCASE("max_epochs 1 yields exactly one epoch line") {
        auto r3 = cli("train --dataset " + quote_arg(f.dataset_path) + " --log " +
                      quote_arg(f.log_path) + " --phase1 " + quote_arg(phase1) + " --out " +
                      quote_arg(f.dir.file("head-1.txt")) + f.common + " --max-epochs 1");
        REQUIRE(r3.exit_code == 0);
        CHECK(r3.output.find("epoch 1 ") != std::string::npos);
        CHECK(r3.output.find("epoch 2 ") == std::string::npos);
    }
}

TEST_CASE("evaluate: report layout; missing head degrades to phase-1 only") {
    Fixture& f = fixture();
    const std::string phase1 = f.dir.file("phase1-eval.csv");
    REQUIRE(cli("retrieve --dataset " + quote_arg(f.dataset_path) + " --log " +
                quote_arg(f.log_path) + " --out " + quote_arg(phase1) + f.common)
                .exit_code == 0);
    const std::string head = f.dir.file("head-eval.txt");
    REQUIRE(cli("train --dataset " + quote_arg(f.dataset_path) + " --log " +
                quote_arg(f.log_path) + " --phase1 " + quote_arg(phase1) + " --out " +
                quote_arg(head) + f.common + " --learning-rate 0.5 --max-epochs 6")
                .exit_code == 0);

    const std::string report = f.dir.file("report.csv");
    auto r = cli("evaluate --dataset " + quote_arg(f.dataset_path) + " --log " +
                 quote_arg(f.log_path) + " --phase1 " + quote_arg(phase1) + " --head " +
                 quote_arg(head) + " --report " + quote_arg(report) + f.common);
    REQUIRE(r.exit_code == 0);

    const std::string csv = testsupport::read_file(report);
    CHECK(csv.rfind("metric,K,value\n", 0) == 0);
    // the planted construction pins the test-split metrics at their maxima
    CHECK(csv.find("phase1_recall,1,1.000000") != std::string::npos);
    CHECK(csv.find("phase2_recall,1,1.000000") != std::string::npos);
    CHECK(csv.find("phase1_mrr,,1.000000") != std::string::npos);
    CHECK(csv.find("phase2_mrr,,1.000000") != std::string::npos);
    CHECK(csv.find("phase1_manual_efforts,10,1.000000") != std::string::npos);
    CHECK(csv.find("phase2_manual_efforts,10,1.000000") != std::string::npos);
    CHECK(csv.find("phase1_manual_efforts,1,1.000000") != std::string::npos);  // ME@1 = 1.00
    CHECK(csv.find("phase2_manual_efforts,1,1.000000") != std::string::npos);

    SUBCASE("no head supplied") {
        const std::string report2 = f.dir.file("report2.csv");
        auto r2 = cli("evaluate --dataset " + quote_arg(f.dataset_path) + " --log " +
                      quote_arg(f.log_path) + " --phase1 " + quote_arg(phase1) + " --report " +
                      quote_arg(report2) + f.common);
        REQUIRE(r2.exit_code == 0);
        CHECK(r2.output.find("notice") != std::string::npos);
        const std::string csv2 = testsupport::read_file(report2);
        CHECK(csv2.find("phase1_recall") != std::string::npos);
        CHECK(csv2.find("phase2") == std::string::npos);
    }
    SUBCASE("missing head file degrades with a notice") {
        const std::string report3 = f.dir.file("report3.csv");
        auto r3 = cli("evaluate --dataset " + quote_arg(f.dataset_path) + " --log " +
                      quote_arg(f.log_path) + " --phase1 " + quote_arg(phase1) + " --head " +
                      quote_arg(f.dir.file("no-such-head.txt")) + " --report " +
                      quote_arg(report3) + f.common);
        REQUIRE(r3.exit_code == 0);
        CHECK(r3.output.find("notice") != std::string::npos);
        CHECK(testsupport::read_file(report3).find("phase2") == std::string::npos);
    }
}

TEST_CASE("rerank: phase-2 provenance in the output CSV") {
    Fixture& f = fixture();
    const std::string phase1 = f.dir.file("phase1-rr.csv");
    REQUIRE(cli("retrieve --dataset " + quote_arg(f.dataset_path) + " --log " +
                quote_arg(f.log_path) + " --out " + quote_arg(phase1) + f.common)
                .exit_code == 0);
    const std::string head = f.dir.file("head-rr.txt");
    REQUIRE(cli("train --dataset " + quote_arg(f.dataset_path) + " --log " +
                quote_arg(f.log_path) + " --phase1 " + quote_arg(phase1) + " --out " +
                quote_arg(head) + f.common + " --learning-rate 0.5 --max-epochs 6")
                .exit_code == 0);

    const std::string out = f.dir.file("phase2.csv");
    auto r = cli("rerank --dataset " + quote_arg(f.dataset_path) + " --log " +
                 quote_arg(f.log_path) + " --phase1 " + quote_arg(phase1) + " --head " +
                 quote_arg(head) + " --out " + quote_arg(out) + f.common);
    REQUIRE(r.exit_code == 0);
    auto lists = load_ranked_lists(out);
    REQUIRE(lists.size() == 10);
    for (const auto& rl : lists) {
        REQUIRE(rl.entries.size() == 20);  // permutation of the phase-1 set
        for (const auto& e : rl.entries) CHECK(e.provenance == Provenance::phase2);
    }

    SUBCASE("trace with the trained head reports phase2 provenance") {
        const CveRecord& cve = f.corpus.records[5];
        auto t = cli("trace --description " + quote_arg(cve.description) + " --log " +
                     quote_arg(f.log_path) + " --head " + quote_arg(head) + f.common);
        REQUIRE(t.exit_code == 0);
        CHECK(t.output.find("phase2") != std::string::npos);
        CHECK(t.output.find(cve.patch_commit_ids[0]) != std::string::npos);
    }
}

TEST_CASE("trace: planted description hits rank 1; usage errors exit 1") {
    Fixture& f = fixture();
    const CveRecord& cve = f.corpus.records[3];
    auto r = cli("trace --description " + quote_arg(cve.description) + " --log " +
                 quote_arg(f.log_path) + f.common);
    REQUIRE(r.exit_code == 0);
    const std::size_t line_start = r.output.find("\n1 ");
    REQUIRE(line_start != std::string::npos);
    const std::string rank1 =
        r.output.substr(line_start, r.output.find('\n', line_start + 1) - line_start);
    CHECK(rank1.find(cve.patch_commit_ids[0]) != std::string::npos);
    CHECK(rank1.find("phase1") != std::string::npos);

    auto usage = cli("trace --description '' --log " + quote_arg(f.log_path));
    CHECK(usage.exit_code == 1);
}

TEST_CASE("tune-lambda prints a grid value") {
    Fixture& f = fixture();
    auto r = cli("tune-lambda --dataset " + quote_arg(f.dataset_path) + " --log " +
                 quote_arg(f.log_path) + f.common);
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("best_lambda 0.10") != std::string::npos);  // planted: every lambda ties
}

TEST_CASE("config file is honored and flags override it") {
    Fixture& f = fixture();
    const std::string cfg_path = f.dir.file("run.cfg");
    testsupport::write_file(cfg_path,
                            "# pipeline settings\n"
                            "seed=7\nprovider_dim=32\ntop_k=3\nnegative_sample_size=80\n");
    const std::string out = f.dir.file("phase1-cfg.csv");
    auto r = cli("retrieve --dataset " + quote_arg(f.dataset_path) + " --log " +
                 quote_arg(f.log_path) + " --out " + quote_arg(out) + " --config " +
                 quote_arg(cfg_path));
    REQUIRE(r.exit_code == 0);
    for (const auto& rl : load_ranked_lists(out)) CHECK(rl.entries.size() == 3);

    // flag wins over the file
    const std::string out2 = f.dir.file("phase1-cfg2.csv");
    auto r2 = cli("retrieve --dataset " + quote_arg(f.dataset_path) + " --log " +
                  quote_arg(f.log_path) + " --out " + quote_arg(out2) + " --config " +
                  quote_arg(cfg_path) + " --top-k 5");
    REQUIRE(r2.exit_code == 0);
    for (const auto& rl : load_ranked_lists(out2)) CHECK(rl.entries.size() == 5);

    auto bad = cli("retrieve --dataset " + quote_arg(f.dataset_path) + " --log " +
                   quote_arg(f.log_path) + " --out " + quote_arg(out2) + " --top-k nonsense");
    CHECK(bad.exit_code == 2);
}

TEST_CASE("exit codes: usage vs data errors") {
    Fixture& f = fixture();
    CHECK(cli("no-such-subcommand").exit_code == 1);
    CHECK(cli("retrieve").exit_code == 1);  // missing required flags
    CHECK(cli("retrieve --dataset /nonexistent --log " + quote_arg(f.log_path) +
              " --out /tmp/x.csv")
              .exit_code == 2);
    CHECK(cli("train --dataset " + quote_arg(f.dataset_path) + " --log " + quote_arg(f.log_path) +
              " --phase1 /nonexistent --out /tmp/h.txt")
              .exit_code == 2);
}

TEST_CASE("unreachable remote provider aborts naming the endpoint") {
    Fixture& f = fixture();
    auto r = cli("retrieve --dataset " + quote_arg(f.dataset_path) + " --log " +
                 quote_arg(f.log_path) + " --out " + quote_arg(f.dir.file("never.csv")) +
                 " --provider remote --endpoint http://127.0.0.1:1 --timeout-ms 300");
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("http://127.0.0.1:1") != std::string::npos);
}

TEST_CASE("git export script feeds ingest and trace") {
    if (testsupport::run_command("git --version >/dev/null").exit_code != 0) {
        MESSAGE("git not available; skipping");
        return;
    }
    TempDir dir{"patchtrace-git"};
    const std::string repo = dir.file("repo");
    auto sh = [&](const std::string& cmd) {
        auto r = testsupport::run_command(cmd);
        REQUIRE(r.exit_code == 0);
        return r;
    };
    sh("git init -q " + quote_arg(repo));
    const std::string g = "git -C " + quote_arg(repo) + " ";
    sh(g + "config user.email dev@example.com && " + g + "config user.name dev");
    testsupport::write_file(repo + "/main.c", "int main() { return 0; }\n");
    sh(g + "add . && " + g + "commit -qm 'initial import'");
    testsupport::write_file(repo + "/main.c", "int main() { return 1; }\n");
    sh(g + "commit -qam 'fix wrong exit code\n\nbody with --- marker\n\nand a blank line'");
    testsupport::write_file(repo + "/main.c", "int main() { return 2; }\n");
    sh(g + "commit -qam 'unrelated cleanup change'");

    const std::string log = dir.file("commits.log");
    sh(std::string(PATCHTRACE_SOURCE_DIR) + "/scripts/export_commit_log.sh " + quote_arg(repo) +
       " > " + quote_arg(log));

    // exported log parses; messages survive verbatim
    auto commits = ingest_commit_log_file(log);
    REQUIRE(commits.size() == 3);
    CHECK(commits[1].message == "fix wrong exit code\n\nbody with --- marker\n\nand a blank line");
    CHECK(commits[1].diff.find("-int main() { return 0; }") != std::string::npos);
    CHECK(commits[1].diff.rfind("diff --git", 0) == 0);

    const std::string fix_hash = commits[1].hash;
    testsupport::write_file(dir.file("cves.jsonl"),
                            "{\"cve_id\":\"CVE-1\",\"description\":\"wrong exit code returned\","
                            "\"repo_id\":\"r\",\"patch_commit_ids\":[\"" + fix_hash + "\"]}\n");
    auto ing = cli("ingest --log " + quote_arg(log) + " --manifest " +
                   quote_arg(dir.file("cves.jsonl")) + " --out " + quote_arg(dir.file("ds.jsonl")));
    REQUIRE(ing.exit_code == 0);

    auto traced = cli("trace --description 'wrong exit code returned' --log " + quote_arg(log));
    REQUIRE(traced.exit_code == 0);
    const std::size_t rank1 = traced.output.find("\n1 ");
    REQUIRE(rank1 != std::string::npos);
    CHECK(traced.output.substr(rank1, traced.output.find('\n', rank1 + 1) - rank1)
              .find(fix_hash) != std::string::npos);
}

TEST_CASE("reruns with one seed are byte-identical") {
    Fixture& f = fixture();
    const std::string a = f.dir.file("det-a.csv");
    const std::string b = f.dir.file("det-b.csv");
    for (const auto& out : {a, b}) {
        REQUIRE(cli("retrieve --dataset " + quote_arg(f.dataset_path) + " --log " +
                    quote_arg(f.log_path) + " --out " + quote_arg(out) + f.common)
                    .exit_code == 0);
    }
    CHECK(testsupport::read_file(a) == testsupport::read_file(b));
}
