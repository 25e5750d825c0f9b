#include "knowflow/attribution.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <optional>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "knowflow/csv.hpp"

namespace knowflow::attribution {

namespace {

void check_config(const MadeInConfig& cfg) {
    if (!(cfg.threshold > 0.0) || cfg.threshold > 1.0)
        throw Error("made-in threshold must lie in (0, 1]");
}

} // namespace

bool is_made_in(const Publication& pub, const std::string& source, const MadeInConfig& cfg,
                const geo::GeoRuleSet& rules) {
    check_config(cfg);
    if (pub.affiliations.empty())
        throw Error("is_made_in: publication '" + pub.id + "' carries no affiliations");

    std::size_t matching = 0, total = 0;
    if (cfg.basis == CountingBasis::institution_instances) {
        for (const auto& a : pub.affiliations) {
            ++total;
            if (rules.normalize(a.raw_country) == source) ++matching;
        }
    } else {
        std::set<std::pair<std::string, std::string>> distinct;
        for (const auto& a : pub.affiliations)
            distinct.emplace(a.institution, rules.normalize(a.raw_country));
        total = distinct.size();
        for (const auto& [inst, country] : distinct)
            if (country == source) ++matching;
    }
    // Exact-threshold cases (1 of 2 at 0.5) must pass; the epsilon only
    // absorbs binary representation error in threshold * total.
    return static_cast<double>(matching) >= cfg.threshold * static_cast<double>(total) - 1e-9;
}

std::set<std::string> select_source_publications(const Corpus& corpus, const MadeInConfig& cfg,
                                                 const geo::GeoRuleSet& rules) {
    check_config(cfg);
    std::vector<char> has_link(corpus.cited.size(), 0);
    for (const auto& l : corpus.links) {
        auto it = corpus.cited_index.find(l.cited_id);
        if (it != corpus.cited_index.end()) has_link[it->second] = 1;
    }
    std::set<std::string> out;
    for (std::size_t i = 0; i < corpus.cited.size(); ++i) {
        if (!has_link[i]) continue; // uncited publications are excluded
        if (is_made_in(corpus.cited[i], corpus.source_country, cfg, rules))
            out.insert(corpus.cited[i].id);
    }
    return out;
}

std::set<std::string> citing_countries(const Publication& pub, const geo::GeoRuleSet& rules) {
    std::set<std::string> out;
    for (const auto& a : pub.affiliations) out.insert(rules.normalize(a.raw_country));
    return out;
}

namespace {

// Shared per-build context: interned vocabularies and resolved links.
struct BuildContext {
    std::vector<std::string> countries; // sorted
    std::vector<std::string> scs;       // sorted

    std::vector<std::vector<std::uint32_t>> citing_country_sets; // per citing pub, sorted unique
    std::vector<std::vector<std::uint32_t>> cited_sc_sets;       // per cited pub (source only)
    std::vector<char> is_source;                                 // per cited pub
    std::vector<std::pair<std::uint32_t, std::uint32_t>> links;  // (citing idx, cited idx)

    std::size_t n_countries() const { return countries.size(); }
    std::size_t n_scs() const { return scs.size(); }
};

BuildContext make_context(const Corpus& corpus, const std::set<std::string>& source_pubs,
                          const geo::GeoRuleSet& rules) {
    BuildContext ctx;

    // Raw country strings repeat heavily; memoize normalization.
    std::unordered_map<std::string, std::string> norm_cache;
    auto normalize = [&](const std::string& raw) -> const std::string& {
        auto it = norm_cache.find(raw);
        if (it == norm_cache.end()) it = norm_cache.emplace(raw, rules.normalize(raw)).first;
        return it->second;
    };

    std::set<std::string> country_names;
    for (const auto& p : corpus.citing)
        for (const auto& a : p.affiliations) country_names.insert(normalize(a.raw_country));
    ctx.countries.assign(country_names.begin(), country_names.end());
    std::unordered_map<std::string_view, std::uint32_t> country_idx;
    for (std::uint32_t i = 0; i < ctx.countries.size(); ++i) country_idx[ctx.countries[i]] = i;

    ctx.citing_country_sets.resize(corpus.citing.size());
    for (std::size_t i = 0; i < corpus.citing.size(); ++i) {
        auto& set = ctx.citing_country_sets[i];
        for (const auto& a : corpus.citing[i].affiliations)
            set.push_back(country_idx.at(normalize(a.raw_country)));
        std::sort(set.begin(), set.end());
        set.erase(std::unique(set.begin(), set.end()), set.end());
    }

    ctx.is_source.assign(corpus.cited.size(), 0);
    std::set<std::string> sc_names;
    for (std::size_t i = 0; i < corpus.cited.size(); ++i) {
        if (!source_pubs.contains(corpus.cited[i].id)) continue;
        ctx.is_source[i] = 1;
        for (const auto& sc : corpus.cited[i].subject_categories) sc_names.insert(sc);
    }
    ctx.scs.assign(sc_names.begin(), sc_names.end());
    std::unordered_map<std::string_view, std::uint32_t> sc_idx;
    for (std::uint32_t i = 0; i < ctx.scs.size(); ++i) sc_idx[ctx.scs[i]] = i;

    ctx.cited_sc_sets.resize(corpus.cited.size());
    for (std::size_t i = 0; i < corpus.cited.size(); ++i) {
        if (!ctx.is_source[i]) continue;
        for (const auto& sc : corpus.cited[i].subject_categories)
            ctx.cited_sc_sets[i].push_back(sc_idx.at(sc));
    }

    ctx.links.reserve(corpus.links.size());
    for (const auto& l : corpus.links) {
        auto citing = corpus.citing_index.find(l.citing_id);
        auto cited = corpus.cited_index.find(l.cited_id);
        if (citing == corpus.citing_index.end() || cited == corpus.cited_index.end()) continue;
        ctx.links.emplace_back(static_cast<std::uint32_t>(citing->second),
                               static_cast<std::uint32_t>(cited->second));
    }
    return ctx;
}

// Dense integer accumulators for one worker's link shard. Merging is
// element-wise addition, so shard boundaries cannot affect the result.
struct Accumulator {
    std::vector<std::int64_t> pub_gain;      // [country]
    std::vector<std::int64_t> sc_gain;       // [sc * n_countries + country]
    std::vector<std::int64_t> sc_benefit;    // [sc]
    std::vector<std::int64_t> pub_benefit;   // [cited idx]
    std::vector<std::uint64_t> citing_seen;  // bitset over citing pubs
    std::int64_t total_benefits = 0;
    std::int64_t total_gains = 0;

    // Post-split weights: counts from citing publications dated in or
    // after each split year. [event][country] and [event][sc][country].
    std::vector<std::vector<std::int64_t>> split_pub_weight;
    std::vector<std::vector<std::int64_t>> split_sc_weight;

    Accumulator(std::size_t n_c, std::size_t n_s, std::size_t n_cited, std::size_t n_citing,
                std::size_t n_events)
        : pub_gain(n_c, 0),
          sc_gain(n_s * n_c, 0),
          sc_benefit(n_s, 0),
          pub_benefit(n_cited, 0),
          citing_seen((n_citing + 63) / 64, 0),
          split_pub_weight(n_events, std::vector<std::int64_t>(n_c, 0)),
          split_sc_weight(n_events, std::vector<std::int64_t>(n_s * n_c, 0)) {}

    void merge(const Accumulator& o) {
        auto add = [](std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
            for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
        };
        add(pub_gain, o.pub_gain);
        add(sc_gain, o.sc_gain);
        add(sc_benefit, o.sc_benefit);
        add(pub_benefit, o.pub_benefit);
        for (std::size_t i = 0; i < citing_seen.size(); ++i) citing_seen[i] |= o.citing_seen[i];
        total_benefits += o.total_benefits;
        total_gains += o.total_gains;
        for (std::size_t e = 0; e < split_pub_weight.size(); ++e) {
            add(split_pub_weight[e], o.split_pub_weight[e]);
            add(split_sc_weight[e], o.split_sc_weight[e]);
        }
    }
};

void accumulate_range(const Corpus& corpus, const BuildContext& ctx,
                      const std::vector<int>& split_years, std::size_t begin, std::size_t end,
                      Accumulator& acc) {
    const std::size_t n_c = ctx.n_countries();
    for (std::size_t li = begin; li < end; ++li) {
        const auto [citing_idx, cited_idx] = ctx.links[li];
        if (!ctx.is_source[cited_idx]) continue;

        const auto& countries = ctx.citing_country_sets[citing_idx];
        const auto& scs = ctx.cited_sc_sets[cited_idx];
        const int citing_year = corpus.citing[citing_idx].year;

        ++acc.total_benefits;
        ++acc.pub_benefit[cited_idx];
        acc.total_gains += static_cast<std::int64_t>(countries.size());
        acc.citing_seen[citing_idx / 64] |= (1ULL << (citing_idx % 64));

        for (std::uint32_t c : countries) ++acc.pub_gain[c];
        for (std::uint32_t s : scs) {
            ++acc.sc_benefit[s];
            auto* row = acc.sc_gain.data() + static_cast<std::size_t>(s) * n_c;
            for (std::uint32_t c : countries) ++row[c];
        }
        for (std::size_t e = 0; e < split_years.size(); ++e) {
            if (citing_year < split_years[e]) continue;
            for (std::uint32_t c : countries) ++acc.split_pub_weight[e][c];
            for (std::uint32_t s : scs) {
                auto* row = acc.split_sc_weight[e].data() + static_cast<std::size_t>(s) * n_c;
                for (std::uint32_t c : countries) ++row[c];
            }
        }
    }
}

geo::CountryTally tally_from_dense(const std::vector<std::int64_t>& dense,
                                   const std::vector<std::string>& names, std::size_t offset) {
    geo::CountryTally t;
    for (std::size_t c = 0; c < names.size(); ++c)
        if (dense[offset + c] > 0) t[names[c]] = dense[offset + c];
    return t;
}

} // namespace

GainLedger build_ledger(const Corpus& corpus, const std::set<std::string>& source_pubs,
                        const MadeInConfig& cfg, const geo::GeoRuleSet& rules,
                        unsigned n_threads) {
    check_config(cfg);
    BuildContext ctx = make_context(corpus, source_pubs, rules);

    std::vector<int> split_years;
    for (const auto& ev : rules.splits()) split_years.push_back(ev.split_year);

    if (n_threads == 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<unsigned>(n_threads, 64);
    if (ctx.links.size() < 4096) n_threads = 1;

    const std::size_t n_c = ctx.n_countries(), n_s = ctx.n_scs();
    Accumulator acc(n_c, n_s, corpus.cited.size(), corpus.citing.size(), split_years.size());
    if (n_threads <= 1) {
        accumulate_range(corpus, ctx, split_years, 0, ctx.links.size(), acc);
    } else {
        std::vector<Accumulator> parts(
            n_threads, Accumulator(n_c, n_s, corpus.cited.size(), corpus.citing.size(),
                                   split_years.size()));
        std::vector<std::thread> workers;
        const std::size_t chunk = (ctx.links.size() + n_threads - 1) / n_threads;
        for (unsigned t = 0; t < n_threads; ++t) {
            std::size_t b = std::min<std::size_t>(t * chunk, ctx.links.size());
            std::size_t e = std::min<std::size_t>(b + chunk, ctx.links.size());
            workers.emplace_back([&, b, e, t] {
                accumulate_range(corpus, ctx, split_years, b, e, parts[t]);
            });
        }
        for (auto& w : workers) w.join();
        for (const auto& p : parts) acc.merge(p);
    }

    GainLedger ledger;
    ledger.total_benefits = acc.total_benefits;
    ledger.total_gains = acc.total_gains;
    for (std::uint64_t word : acc.citing_seen)
        ledger.citing_publication_count += std::popcount(word);
    for (std::size_t i = 0; i < corpus.cited.size(); ++i)
        if (acc.pub_benefit[i] > 0) ledger.pub_benefits[corpus.cited[i].id] = acc.pub_benefit[i];

    // Split reassignment: each tally is redistributed against its own
    // post-split successor counts (equal split when none exist).
    if (rules.splits().empty()) {
        ledger.pub_level_gains = tally_from_dense(acc.pub_gain, ctx.countries, 0);
        for (std::size_t s = 0; s < n_s; ++s) {
            auto row = tally_from_dense(acc.sc_gain, ctx.countries, s * n_c);
            if (!row.empty()) ledger.sc_gains[ctx.scs[s]] = std::move(row);
        }
    } else {
        // Each successor's weight comes from its own event's year cutoff.
        auto country_index = [&](const std::string& name) -> std::optional<std::size_t> {
            auto it = std::lower_bound(ctx.countries.begin(), ctx.countries.end(), name);
            if (it == ctx.countries.end() || *it != name) return std::nullopt;
            return static_cast<std::size_t>(it - ctx.countries.begin());
        };
        auto successor_weights = [&](const std::vector<std::vector<std::int64_t>>& per_event,
                                     std::size_t offset) {
            geo::CountryTally weights;
            for (std::size_t e = 0; e < rules.splits().size(); ++e)
                for (const auto& succ : rules.splits()[e].successors)
                    if (auto c = country_index(succ))
                        if (per_event[e][offset + *c] > 0) weights[succ] = per_event[e][offset + *c];
            return weights;
        };

        ledger.pub_level_gains = geo::reassign_splits(
            tally_from_dense(acc.pub_gain, ctx.countries, 0),
            successor_weights(acc.split_pub_weight, 0), rules, &ledger.reassignment_flags);
        for (std::size_t s = 0; s < n_s; ++s) {
            auto row = tally_from_dense(acc.sc_gain, ctx.countries, s * n_c);
            if (row.empty()) continue;
            std::vector<std::string> flags;
            auto reassigned = geo::reassign_splits(
                row, successor_weights(acc.split_sc_weight, s * n_c), rules, &flags);
            for (const auto& f : flags)
                ledger.reassignment_flags.push_back("sc '" + ctx.scs[s] + "': " + f);
            if (!reassigned.empty()) ledger.sc_gains[ctx.scs[s]] = std::move(reassigned);
        }
    }

    for (std::size_t s = 0; s < n_s; ++s)
        if (acc.sc_benefit[s] > 0) ledger.sc_benefits[ctx.scs[s]] = acc.sc_benefit[s];
    return ledger;
}

void export_ledger(const GainLedger& ledger, const std::string& csv_path,
                   const std::string& totals_json_path) {
    csv::Writer w(csv_path);
    w.comment("gain/benefit ledger export");
    w.comment("level=pub_gain: publication-level gains per country");
    w.comment("level=sc_gain: SC-level gains per (sc, country), full counting");
    w.comment("level=sc_benefit: SC-level benefits, full counting");
    w.comment("level=pub_benefit: citations per cited publication (id in the sc column)");
    w.row({"level", "sc", "country", "count"});
    for (const auto& [country, n] : ledger.pub_level_gains)
        w.row({"pub_gain", "", country, std::to_string(n)});
    for (const auto& [sc, row] : ledger.sc_gains)
        for (const auto& [country, n] : row)
            w.row({"sc_gain", sc, country, std::to_string(n)});
    for (const auto& [sc, n] : ledger.sc_benefits)
        w.row({"sc_benefit", sc, "", std::to_string(n)});
    for (const auto& [id, n] : ledger.pub_benefits)
        w.row({"pub_benefit", id, "", std::to_string(n)});

    nlohmann::ordered_json totals;
    totals["total_benefits"] = ledger.total_benefits;
    totals["total_gains"] = ledger.total_gains;
    totals["citing_publication_count"] = ledger.citing_publication_count;
    std::ofstream out(totals_json_path, std::ios::binary);
    if (!out) throw Error("cannot write " + totals_json_path);
    out << totals.dump(2) << '\n';
}

} // namespace knowflow::attribution
