#include "patchtrace/dataset_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "patchtrace/errors.hpp"

namespace patchtrace {

namespace {

using nlohmann::json;

constexpr const char* kFormatName = "patchtrace-dataset";
constexpr int kFormatVersion = 1;

}  // namespace

void save_dataset(const Dataset& ds, std::ostream& out) {
    json header;
    header["format"] = kFormatName;
    header["version"] = kFormatVersion;
    header["records"] = ds.records.size();
    out << header.dump() << '\n';

    for (const auto& r : ds.records) {
        json j;
        j["cve_id"] = r.cve_id;
        j["description"] = r.description;
        j["repo_id"] = r.repo_id;
        j["patch_commit_ids"] = r.patch_commit_ids;
        auto cs = ds.candidate_sets.find(r.cve_id);
        j["candidates"] = cs == ds.candidate_sets.end() ? std::vector<std::string>{}
                                                        : cs->second.candidates;
        auto sp = ds.split.find(r.cve_id);
        j["split"] = sp == ds.split.end() ? "train" : to_string(sp->second);
        out << j.dump() << '\n';
    }
}

void save_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open dataset for writing: " + path);
    save_dataset(ds, out);
    if (!out.good()) throw Error("failed writing dataset: " + path);
}

Dataset load_dataset(std::istream& in) {
    Dataset ds;
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) {
        throw FormatError("missing dataset header", 1);
    }
    ++line_no;
    try {
        json header = json::parse(line);
        if (header.at("format").get<std::string>() != kFormatName) {
            throw FormatError("not a dataset file", line_no);
        }
        if (header.at("version").get<int>() != kFormatVersion) {
            throw FormatError("unsupported dataset version", line_no);
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("invalid dataset header: ") + e.what(), line_no);
    }

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            json j = json::parse(line);
            CveRecord r;
            r.cve_id = j.at("cve_id").get<std::string>();
            r.description = j.at("description").get<std::string>();
            r.repo_id = j.at("repo_id").get<std::string>();
            r.patch_commit_ids = j.at("patch_commit_ids").get<std::vector<std::string>>();

            CandidateSet cs;
            cs.cve_id = r.cve_id;
            cs.candidates = j.at("candidates").get<std::vector<std::string>>();
            for (const auto& h : cs.candidates) {
                for (const auto& p : r.patch_commit_ids) {
                    if (h == p) cs.patch_labels.insert(h);
                }
            }
            Split split = split_from_string(j.at("split").get<std::string>());

            if (ds.split.count(r.cve_id)) {
                throw FormatError("duplicate cve_id: " + r.cve_id, line_no);
            }
            ds.candidate_sets.emplace(r.cve_id, std::move(cs));
            ds.split.emplace(r.cve_id, split);
            ds.records.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw FormatError(std::string("invalid dataset record: ") + e.what(), line_no);
        } catch (const FormatError&) {
            throw;
        } catch (const Error& e) {
            throw FormatError(e.what(), line_no);
        }
    }
    return ds;
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open dataset: " + path);
    return load_dataset(in);
}

std::vector<CveRecord> load_cve_manifest(std::istream& in) {
    std::vector<CveRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            json j = json::parse(line);
            CveRecord r;
            r.cve_id = j.at("cve_id").get<std::string>();
            r.description = j.at("description").get<std::string>();
            r.repo_id = j.at("repo_id").get<std::string>();
            r.patch_commit_ids = j.at("patch_commit_ids").get<std::vector<std::string>>();
            if (r.cve_id.empty()) throw FormatError("empty cve_id", line_no);
            if (r.patch_commit_ids.empty()) {
                throw FormatError("empty patch_commit_ids for " + r.cve_id, line_no);
            }
            records.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw FormatError(std::string("invalid manifest record: ") + e.what(), line_no);
        }
    }
    return records;
}

std::vector<CveRecord> load_cve_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open manifest: " + path);
    return load_cve_manifest(in);
}

}  // namespace patchtrace
