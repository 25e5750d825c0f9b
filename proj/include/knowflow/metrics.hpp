#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "knowflow/attribution.hpp"
#include "knowflow/corpus.hpp"
#include "knowflow/geo.hpp"

namespace knowflow::metrics {

using attribution::GainLedger;

// sc identifier -> macro-area identifier; total over the SC universe, no
// multi-assignment (enforced by the map itself).
using MacroAreaMap = std::map<std::string, std::string>;

MacroAreaMap load_macro_area_map(const std::string& path);

// ---------------------------------------------------------------------------
// Scientific Gain Specialization Index

// Balassa-style specialization over SC-level gains,
//   100 * tanh(ln((G_kj / sum_j G_kj) / (sum_k G_kj / sum_k sum_j G_kj))),
// evaluated through the closed form tanh(ln x) = (x^2 - 1) / (x^2 + 1).
// Conventions: zero numerator with positive denominators -> -100 (the
// continuous limit); a zero country total or zero SC total -> undefined.
// `smoothing_epsilon` > 0 adds epsilon to every (country, sc) cell first.
std::optional<double> sgsi(const GainLedger& ledger, const std::string& country,
                           const std::string& sc, double smoothing_epsilon = 0.0);

struct SgsiMatrix {
    std::vector<std::string> countries; // sorted
    std::vector<std::string> scs;       // sorted
    std::vector<std::optional<double>> values; // row-major [country][sc]
    double smoothing_epsilon = 0.0;

    std::optional<double> at(std::size_t country_i, std::size_t sc_i) const {
        return values[country_i * scs.size() + sc_i];
    }
    std::optional<double> lookup(const std::string& country, const std::string& sc) const;
};

SgsiMatrix sgsi_matrix(const GainLedger& ledger, double smoothing_epsilon = 0.0);

// ---------------------------------------------------------------------------
// Geographical reach

// Number of countries with positive SC-level gains. Unknown SC -> Error.
std::int64_t geographical_reach(const GainLedger& ledger, const std::string& sc);

struct SamplingConfig {
    int n_samples = 100;
    int sample_size = 100;
    std::uint64_t seed = 20180103; // documented default, see README
};

// Size-controlled reach: draws `n_samples` samples without replacement of
// min(sample_size, |SC publications|) cited source publications, measures
// the reach of each restricted link set exactly as the full measure does
// (including split reassignment), and returns the mean. Deterministic for
// a fixed seed: the engine is mt19937_64 seeded per SC with
// fnv1a64(seed_bytes || sc), sampling via partial Fisher-Yates with
// rejection-sampled bounds.
double sampled_reach(const Corpus& corpus, const GainLedger& ledger,
                     const geo::GeoRuleSet& rules, const std::string& sc,
                     const SamplingConfig& cfg);

// The sample sets themselves, for callers that recompute reach
// independently. sampled_reach evaluates exactly these samples.
std::vector<std::vector<std::string>> sc_samples(const Corpus& corpus, const GainLedger& ledger,
                                                 const std::string& sc, const SamplingConfig& cfg);

// ---------------------------------------------------------------------------
// Rank statistics

// Spearman correlation with midrank tie handling (Pearson on midranks).
// Lengths must match and n >= 2. A constant input yields 0 (degenerate
// variance), identical constant inputs yield 1.
double spearman_rho(std::span<const double> xs, std::span<const double> ys);

// Fraction of an SC's benefits captured by one country; undefined when the
// SC has no benefits.
std::optional<double> gains_to_benefits_ratio(const GainLedger& ledger, const std::string& sc,
                                              const std::string& country);

struct RankRow {
    std::string country;
    std::int64_t gains = 0;
    double share = 0.0; // of total publication-level gains
    int rank_by_gains = 0;
    std::optional<std::int64_t> external_pub_count;
    std::optional<double> share_of_pubs;
    std::optional<int> rank_by_pubs;
    std::optional<double> gains_per_pub;
};

struct RankTable {
    std::vector<RankRow> rows; // sorted by gains desc, code asc; truncated to top_n
    std::int64_t total_gains = 0;
    std::vector<std::string> missing_pub_counts; // countries lacking an external count
};

// Ranks are ordinal permutations 1..n; ties broken by country code.
// Shares are computed before top-n truncation.
RankTable rank_table(const GainLedger& ledger,
                     const std::map<std::string, std::int64_t>& external_pub_counts, int top_n);

// For each SC, countries ranked by SC-level gains; per country, how often
// it occupies positions 1..k. Ties broken by country code.
std::map<std::string, std::vector<std::int64_t>> top_rank_frequencies(const GainLedger& ledger,
                                                                      int k = 5);

// ---------------------------------------------------------------------------
// Reach reporting over macro-areas

struct ReachRow {
    std::string sc;
    std::string macro_area; // empty when no map was supplied
    std::int64_t publication_count = 0;
    double average_impact = 0.0; // benefits per publication
    std::int64_t exact_reach = 0;
    std::optional<double> sampled_mean_reach;
};

// One row per SC in the ledger. When `map` is non-null every SC gets its
// macro-area; when `sampling` is non-null the sampled mean is filled in.
// Per-SC sub-seeding makes the result independent of `n_threads`.
std::vector<ReachRow> reach_report(const Corpus& corpus, const GainLedger& ledger,
                                   const geo::GeoRuleSet& rules, const MacroAreaMap* map,
                                   const SamplingConfig* sampling, unsigned n_threads = 0);

struct AreaRange {
    std::string area;
    int sc_count = 0;
    std::int64_t min_reach = 0;
    std::int64_t max_reach = 0;
    double mean_reach = 0.0;
    std::optional<double> min_sampled, max_sampled, mean_sampled;
};

struct MacroAreaRanges {
    std::vector<AreaRange> areas; // sorted by area id
    double global_mean_reach = 0.0;
    std::optional<double> global_mean_sampled;
};

// Per-area min/max/mean of reach plus the overall mean. An SC missing from
// the map -> Error listing it.
MacroAreaRanges macro_area_ranges(const std::vector<ReachRow>& rows, const MacroAreaMap& map);

struct ReachCorrelations {
    double rho_reach_vs_pubs = 0.0;
    double rho_reach_vs_impact = 0.0;
    bool pubs_degenerate = false;   // constant publication counts
    bool impact_degenerate = false; // constant impact
};

ReachCorrelations reach_correlations(const std::vector<ReachRow>& rows);

} // namespace knowflow::metrics
