#pragma once

#include <iosfwd>
#include <string>

#include "patchtrace/types.hpp"

namespace patchtrace {

// Dataset persistence: line-delimited UTF-8, one JSON object per line.
// Line 1 is a header object; every following line is one CVE record with
// the fields `cve_id`, `description`, `repo_id`, `patch_commit_ids`,
// `candidates`, `split`.

void save_dataset(const Dataset& ds, std::ostream& out);
void save_dataset(const Dataset& ds, const std::string& path);

/// Throws FormatError (with the line number) on ill-formed input.
Dataset load_dataset(std::istream& in);
Dataset load_dataset(const std::string& path);

/// CVE manifest: line-delimited JSON objects with `cve_id`, `description`,
/// `repo_id` and `patch_commit_ids` (no header line).
std::vector<CveRecord> load_cve_manifest(std::istream& in);
std::vector<CveRecord> load_cve_manifest(const std::string& path);

}  // namespace patchtrace
