#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "knowflow/common.hpp"

namespace knowflow {

enum class DocType { article, review, letter, proceedings, other };

// Unknown strings map to `other` so corpora with exotic document kinds
// still load; the doc-type filter is what narrows the cited side.
DocType doc_type_from_string(std::string_view s);
std::string_view to_string(DocType t);

struct Affiliation {
    std::string institution;
    std::string raw_country;
    int record_date = 0; // year of the publication carrying the address

    bool operator==(const Affiliation&) const = default;
};

struct Publication {
    std::string id;
    int year = 0;
    DocType doc_type = DocType::other;
    std::vector<Affiliation> affiliations;
    std::vector<std::string> subject_categories; // sorted, unique

    bool operator==(const Publication&) const = default;
};

struct CitationLink {
    std::string citing_id;
    std::string cited_id;

    bool operator==(const CitationLink&) const = default;
};

struct ValidationSummary {
    std::size_t cited_records = 0;
    std::size_t citing_records = 0;
    std::size_t link_records = 0;
    std::size_t dropped_addresses = 0;        // addresses without a country
    std::size_t citing_without_country = 0;   // citing records left with no affiliation
    std::size_t duplicate_links_rejected = 0; // nonzero only in error reports
};

// Immutable after construction; safe to share across threads.
struct Corpus {
    std::vector<Publication> cited;
    std::vector<Publication> citing;
    std::vector<CitationLink> links;
    std::string source_country;

    // id -> position, rebuilt by reindex()
    std::unordered_map<std::string, std::size_t> cited_index;
    std::unordered_map<std::string, std::size_t> citing_index;

    void reindex();

    bool operator==(const Corpus& o) const {
        return cited == o.cited && citing == o.citing && links == o.links &&
               source_country == o.source_country;
    }
};

// Reads and validates the three corpus files. Links may be JSONL or CSV
// (by extension). Throws Error with file/line context on malformed input,
// dangling link ids, duplicate publication ids or duplicate links.
Corpus load_corpus(const std::string& cited_path,
                   const std::string& citing_path,
                   const std::string& links_path,
                   const std::string& source_country,
                   ValidationSummary* summary = nullptr);

// Restricts the cited side to the allowed kinds; links whose cited
// endpoint was removed are dropped. The citing side is untouched.
Corpus filter_cited_doc_types(const Corpus& corpus, const std::set<DocType>& allowed);

// Canonical JSONL serialization; load(save(c)) == c.
void save_corpus(const Corpus& corpus,
                 const std::string& cited_path,
                 const std::string& citing_path,
                 const std::string& links_path);

} // namespace knowflow
