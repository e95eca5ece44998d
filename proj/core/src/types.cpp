#include "patchtrace/types.hpp"

#include "patchtrace/errors.hpp"

namespace patchtrace {

const char* to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::validation: return "validation";
        case Split::test: return "test";
    }
    return "train";
}

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "validation") return Split::validation;
    if (s == "test") return Split::test;
    throw Error("unknown split name: " + s);
}

const CveRecord* Dataset::find_record(const std::string& cve_id) const {
    for (const auto& r : records) {
        if (r.cve_id == cve_id) return &r;
    }
    return nullptr;
}

}  // namespace patchtrace
