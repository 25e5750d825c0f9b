#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "knowflow/corpus.hpp"
#include "knowflow/geo.hpp"

namespace knowflow::attribution {

enum class CountingBasis {
    institution_instances, // every address counts, repeats included
    distinct_institutions  // deduplicated (institution, country) pairs
};

struct MadeInConfig {
    double threshold = 0.5; // fraction in (0, 1]
    CountingBasis basis = CountingBasis::institution_instances;
};

// Accumulated benefit/gain counts. Benefits are citations received by
// source-country publications; gains credit each benefit to every distinct
// country on the citing side. SC-level gains use full counting (a citation
// of a multi-category publication counts once per category), so they do
// not sum to total_gains; publication-level and SC-level figures are kept
// separately.
struct GainLedger {
    geo::CountryTally pub_level_gains;                  // country -> gains
    std::map<std::string, geo::CountryTally> sc_gains;  // sc -> country -> gains
    std::map<std::string, std::int64_t> sc_benefits;    // sc -> benefits
    std::map<std::string, std::int64_t> pub_benefits;   // cited pub id -> citations
    std::int64_t total_benefits = 0;
    std::int64_t total_gains = 0;
    std::int64_t citing_publication_count = 0; // citing pubs with >=1 counted link
    std::vector<std::string> reassignment_flags;

    bool operator==(const GainLedger& o) const {
        return pub_level_gains == o.pub_level_gains && sc_gains == o.sc_gains &&
               sc_benefits == o.sc_benefits && pub_benefits == o.pub_benefits &&
               total_benefits == o.total_benefits && total_gains == o.total_gains &&
               citing_publication_count == o.citing_publication_count;
    }
};

// True when the source country's share of the affiliation list meets the
// threshold ("at least" semantics: exactly 50% of two institutions passes).
bool is_made_in(const Publication& pub, const std::string& source, const MadeInConfig& cfg,
                const geo::GeoRuleSet& rules);

// Cited publications that pass the made-in rule and have at least one
// citation link.
std::set<std::string> select_source_publications(const Corpus& corpus, const MadeInConfig& cfg,
                                                 const geo::GeoRuleSet& rules);

// Deduplicated normalized countries on a citing publication's affiliation
// list; author/institution multiplicity per country is irrelevant.
std::set<std::string> citing_countries(const Publication& pub, const geo::GeoRuleSet& rules);

// Aggregates benefits and gains over every link into a source publication,
// then applies split reassignment to the final tallies. Work is sharded
// across `n_threads` workers (0 = hardware concurrency) with commutative
// integer accumulation, so the result is independent of thread count.
GainLedger build_ledger(const Corpus& corpus, const std::set<std::string>& source_pubs,
                        const MadeInConfig& cfg, const geo::GeoRuleSet& rules,
                        unsigned n_threads = 0);

// CSV rows (level, sc, country, count) plus a totals JSON block.
void export_ledger(const GainLedger& ledger, const std::string& csv_path,
                   const std::string& totals_json_path);

} // namespace knowflow::attribution
