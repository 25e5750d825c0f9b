#include "knowflow/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <thread>
#include <unordered_map>

#include <json.hpp>

namespace knowflow::metrics {

MacroAreaMap load_macro_area_map(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open macro-area map: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(path + ": invalid JSON: " + e.what());
    }
    if (!j.is_object()) throw Error(path + ": macro-area map must be an object of sc -> area");
    MacroAreaMap map;
    for (const auto& [sc, area] : j.items()) {
        if (!area.is_string()) throw Error(path + ": area for '" + sc + "' must be a string");
        map[sc] = area.get<std::string>();
    }
    return map;
}

// ---------------------------------------------------------------------------
// SGSI

namespace {

struct SgsiMargins {
    std::vector<std::string> countries, scs;
    std::vector<double> cell;    // [country][sc], smoothing applied
    std::vector<double> row_sum; // per country
    std::vector<double> col_sum; // per sc
    double total = 0.0;
};

SgsiMargins sgsi_margins(const attribution::GainLedger& ledger, double eps) {
    SgsiMargins m;
    std::set<std::string> countries;
    for (const auto& [sc, row] : ledger.sc_gains)
        for (const auto& [country, n] : row) countries.insert(country);
    m.countries.assign(countries.begin(), countries.end());
    for (const auto& [sc, row] : ledger.sc_gains) m.scs.push_back(sc);

    const std::size_t n_c = m.countries.size(), n_s = m.scs.size();
    m.cell.assign(n_c * n_s, eps);
    std::unordered_map<std::string_view, std::size_t> c_idx;
    for (std::size_t i = 0; i < n_c; ++i) c_idx[m.countries[i]] = i;
    for (std::size_t s = 0; s < n_s; ++s) {
        const auto& row = ledger.sc_gains.at(m.scs[s]);
        for (const auto& [country, n] : row)
            m.cell[c_idx.at(country) * n_s + s] += static_cast<double>(n);
    }
    m.row_sum.assign(n_c, 0.0);
    m.col_sum.assign(n_s, 0.0);
    for (std::size_t c = 0; c < n_c; ++c)
        for (std::size_t s = 0; s < n_s; ++s) {
            double v = m.cell[c * n_s + s];
            m.row_sum[c] += v;
            m.col_sum[s] += v;
            m.total += v;
        }
    return m;
}

// tanh(ln x) = (x^2 - 1) / (x^2 + 1); exact for ratio 1 and dyadic ratios.
std::optional<double> sgsi_from_margins(double cell, double row, double col, double total) {
    if (row <= 0.0 || col <= 0.0) return std::nullopt;
    if (cell <= 0.0) return -100.0; // continuous limit of the index as G -> 0
    double ratio = (cell * total) / (row * col);
    double r2 = ratio * ratio;
    return 100.0 * (r2 - 1.0) / (r2 + 1.0);
}

} // namespace

std::optional<double> sgsi(const GainLedger& ledger, const std::string& country,
                           const std::string& sc, double smoothing_epsilon) {
    SgsiMargins m = sgsi_margins(ledger, smoothing_epsilon);
    auto ci = std::lower_bound(m.countries.begin(), m.countries.end(), country);
    auto si = std::lower_bound(m.scs.begin(), m.scs.end(), sc);
    if (ci == m.countries.end() || *ci != country) return std::nullopt;
    if (si == m.scs.end() || *si != sc) return std::nullopt;
    std::size_t c = static_cast<std::size_t>(ci - m.countries.begin());
    std::size_t s = static_cast<std::size_t>(si - m.scs.begin());
    return sgsi_from_margins(m.cell[c * m.scs.size() + s], m.row_sum[c], m.col_sum[s], m.total);
}

std::optional<double> SgsiMatrix::lookup(const std::string& country, const std::string& sc) const {
    auto ci = std::lower_bound(countries.begin(), countries.end(), country);
    auto si = std::lower_bound(scs.begin(), scs.end(), sc);
    if (ci == countries.end() || *ci != country || si == scs.end() || *si != sc)
        return std::nullopt;
    return at(static_cast<std::size_t>(ci - countries.begin()),
              static_cast<std::size_t>(si - scs.begin()));
}

SgsiMatrix sgsi_matrix(const GainLedger& ledger, double smoothing_epsilon) {
    SgsiMargins m = sgsi_margins(ledger, smoothing_epsilon);
    SgsiMatrix out;
    out.countries = m.countries;
    out.scs = m.scs;
    out.smoothing_epsilon = smoothing_epsilon;
    out.values.resize(out.countries.size() * out.scs.size());
    for (std::size_t c = 0; c < out.countries.size(); ++c)
        for (std::size_t s = 0; s < out.scs.size(); ++s)
            out.values[c * out.scs.size() + s] =
                sgsi_from_margins(m.cell[c * m.scs.size() + s], m.row_sum[c], m.col_sum[s], m.total);
    return out;
}

// ---------------------------------------------------------------------------
// Geographical reach

std::int64_t geographical_reach(const GainLedger& ledger, const std::string& sc) {
    auto row = ledger.sc_gains.find(sc);
    if (row == ledger.sc_gains.end()) {
        if (ledger.sc_benefits.contains(sc)) return 0; // benefits without gains
        throw Error("geographical_reach: unknown subject category '" + sc + "'");
    }
    std::int64_t n = 0;
    for (const auto& [country, gains] : row->second)
        if (gains > 0) ++n;
    return n;
}

namespace {

std::uint64_t sc_sub_seed(std::uint64_t master, const std::string& sc) {
    char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((master >> (8 * i)) & 0xFF);
    return fnv1a64(sc, fnv1a64(std::string_view(bytes, 8)));
}

// Unbiased bounded draw via rejection; mt19937_64's output sequence is
// specified by the standard, so results are identical across platforms.
std::uint64_t bounded_u64(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

// Aggregated citing-side counts per source publication, shared by exact
// and sampled reach so that a sample covering the whole SC reproduces the
// exact value bit for bit.
struct ReachContext {
    std::vector<std::string> countries;
    // per cited pub: (country, link count) over all in-links
    std::vector<std::vector<std::pair<std::uint32_t, std::int64_t>>> pub_counts;
    // per split event, per cited pub: counts from citing pubs dated >= split year
    std::vector<std::vector<std::vector<std::pair<std::uint32_t, std::int64_t>>>> pub_post_counts;
    std::vector<int> split_years;
};

ReachContext make_reach_context(const Corpus& corpus, const geo::GeoRuleSet& rules) {
    ReachContext ctx;
    std::unordered_map<std::string, std::string> norm_cache;
    auto normalize = [&](const std::string& raw) -> const std::string& {
        auto it = norm_cache.find(raw);
        if (it == norm_cache.end()) it = norm_cache.emplace(raw, rules.normalize(raw)).first;
        return it->second;
    };

    std::set<std::string> names;
    for (const auto& p : corpus.citing)
        for (const auto& a : p.affiliations) names.insert(normalize(a.raw_country));
    ctx.countries.assign(names.begin(), names.end());
    std::unordered_map<std::string_view, std::uint32_t> idx;
    for (std::uint32_t i = 0; i < ctx.countries.size(); ++i) idx[ctx.countries[i]] = i;

    std::vector<std::vector<std::uint32_t>> citing_sets(corpus.citing.size());
    for (std::size_t i = 0; i < corpus.citing.size(); ++i) {
        for (const auto& a : corpus.citing[i].affiliations)
            citing_sets[i].push_back(idx.at(normalize(a.raw_country)));
        std::sort(citing_sets[i].begin(), citing_sets[i].end());
        citing_sets[i].erase(std::unique(citing_sets[i].begin(), citing_sets[i].end()),
                             citing_sets[i].end());
    }

    for (const auto& ev : rules.splits()) ctx.split_years.push_back(ev.split_year);

    const std::size_t n_events = ctx.split_years.size();
    std::vector<std::map<std::uint32_t, std::int64_t>> agg(corpus.cited.size());
    std::vector<std::vector<std::map<std::uint32_t, std::int64_t>>> post(
        n_events, std::vector<std::map<std::uint32_t, std::int64_t>>(corpus.cited.size()));
    for (const auto& l : corpus.links) {
        auto citing = corpus.citing_index.find(l.citing_id);
        auto cited = corpus.cited_index.find(l.cited_id);
        if (citing == corpus.citing_index.end() || cited == corpus.cited_index.end()) continue;
        const int year = corpus.citing[citing->second].year;
        for (std::uint32_t c : citing_sets[citing->second]) {
            ++agg[cited->second][c];
            for (std::size_t e = 0; e < n_events; ++e)
                if (year >= ctx.split_years[e]) ++post[e][cited->second][c];
        }
    }
    ctx.pub_counts.resize(corpus.cited.size());
    ctx.pub_post_counts.assign(
        n_events, std::vector<std::vector<std::pair<std::uint32_t, std::int64_t>>>(
                      corpus.cited.size()));
    for (std::size_t p = 0; p < corpus.cited.size(); ++p) {
        ctx.pub_counts[p].assign(agg[p].begin(), agg[p].end());
        for (std::size_t e = 0; e < n_events; ++e)
            ctx.pub_post_counts[e][p].assign(post[e][p].begin(), post[e][p].end());
    }
    return ctx;
}

std::int64_t subset_reach(const ReachContext& ctx, const geo::GeoRuleSet& rules,
                          const std::vector<std::size_t>& pubs) {
    std::vector<std::int64_t> dense(ctx.countries.size(), 0);
    for (std::size_t p : pubs)
        for (const auto& [c, n] : ctx.pub_counts[p]) dense[c] += n;
    if (ctx.split_years.empty()) {
        std::int64_t reach = 0;
        for (std::int64_t v : dense) reach += (v > 0);
        return reach;
    }
    geo::CountryTally tally;
    for (std::size_t c = 0; c < dense.size(); ++c)
        if (dense[c] > 0) tally[ctx.countries[c]] = dense[c];
    geo::CountryTally weights;
    for (std::size_t e = 0; e < ctx.split_years.size(); ++e) {
        std::vector<std::int64_t> post_dense(ctx.countries.size(), 0);
        for (std::size_t p : pubs)
            for (const auto& [c, n] : ctx.pub_post_counts[e][p]) post_dense[c] += n;
        for (const auto& succ : rules.splits()[e].successors) {
            auto it = std::lower_bound(ctx.countries.begin(), ctx.countries.end(), succ);
            if (it == ctx.countries.end() || *it != succ) continue;
            std::int64_t v = post_dense[static_cast<std::size_t>(it - ctx.countries.begin())];
            if (v > 0) weights[succ] = v;
        }
    }
    auto reassigned = geo::reassign_splits(tally, weights, rules);
    std::int64_t reach = 0;
    for (const auto& [country, n] : reassigned)
        if (n > 0) ++reach;
    return reach;
}

// Source publications carrying the SC, in deterministic id order.
std::vector<std::size_t> sc_member_pubs(const Corpus& corpus, const GainLedger& ledger,
                                        const std::string& sc) {
    std::vector<std::pair<std::string_view, std::size_t>> members;
    for (const auto& [id, n] : ledger.pub_benefits) {
        auto it = corpus.cited_index.find(id);
        if (it == corpus.cited_index.end()) continue;
        const auto& p = corpus.cited[it->second];
        if (std::binary_search(p.subject_categories.begin(), p.subject_categories.end(), sc))
            members.emplace_back(p.id, it->second);
    }
    std::sort(members.begin(), members.end());
    std::vector<std::size_t> out;
    out.reserve(members.size());
    for (const auto& [id, i] : members) out.push_back(i);
    return out;
}

std::vector<std::vector<std::size_t>> draw_samples(const std::vector<std::size_t>& members,
                                                   const SamplingConfig& cfg,
                                                   const std::string& sc) {
    if (cfg.n_samples < 1 || cfg.sample_size < 1)
        throw Error("sampling requires n_samples >= 1 and sample_size >= 1");
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(cfg.sample_size),
                                                members.size());
    std::mt19937_64 rng(sc_sub_seed(cfg.seed, sc));
    std::vector<std::vector<std::size_t>> samples;
    samples.reserve(static_cast<std::size_t>(cfg.n_samples));
    std::vector<std::size_t> pool = members;
    for (int s = 0; s < cfg.n_samples; ++s) {
        // Partial Fisher-Yates over a fresh copy of the ordered pool.
        std::copy(members.begin(), members.end(), pool.begin());
        for (std::size_t i = 0; i < k; ++i) {
            std::size_t j = i + static_cast<std::size_t>(
                                    bounded_u64(rng, static_cast<std::uint64_t>(pool.size() - i)));
            std::swap(pool[i], pool[j]);
        }
        samples.emplace_back(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
    }
    return samples;
}

} // namespace

std::vector<std::vector<std::string>> sc_samples(const Corpus& corpus, const GainLedger& ledger,
                                                 const std::string& sc,
                                                 const SamplingConfig& cfg) {
    auto members = sc_member_pubs(corpus, ledger, sc);
    if (members.empty())
        throw Error("sc_samples: no source publications in subject category '" + sc + "'");
    auto samples = draw_samples(members, cfg, sc);
    std::vector<std::vector<std::string>> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        std::vector<std::string> ids;
        ids.reserve(s.size());
        for (std::size_t i : s) ids.push_back(corpus.cited[i].id);
        out.push_back(std::move(ids));
    }
    return out;
}

double sampled_reach(const Corpus& corpus, const GainLedger& ledger, const geo::GeoRuleSet& rules,
                     const std::string& sc, const SamplingConfig& cfg) {
    auto members = sc_member_pubs(corpus, ledger, sc);
    if (members.empty())
        throw Error("sampled_reach: no source publications in subject category '" + sc + "'");
    ReachContext ctx = make_reach_context(corpus, rules);
    auto samples = draw_samples(members, cfg, sc);
    std::int64_t sum = 0;
    for (const auto& s : samples) sum += subset_reach(ctx, rules, s);
    return static_cast<double>(sum) / static_cast<double>(samples.size());
}

// ---------------------------------------------------------------------------
// Rank statistics

namespace {

std::vector<double> midranks(std::span<const double> v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = mid;
        i = j + 1;
    }
    return ranks;
}

} // namespace

double spearman_rho(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw Error("spearman_rho: length mismatch");
    if (xs.size() < 2) throw Error("spearman_rho: need at least two observations");
    auto rx = midranks(xs);
    auto ry = midranks(ys);
    const double n = static_cast<double>(rx.size());
    double mean = (n + 1.0) / 2.0; // midranks always average to (n+1)/2
    double num = 0.0, dx = 0.0, dy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        num += (rx[i] - mean) * (ry[i] - mean);
        dx += (rx[i] - mean) * (rx[i] - mean);
        dy += (ry[i] - mean) * (ry[i] - mean);
    }
    if (dx == 0.0 && dy == 0.0) return 1.0;
    if (dx == 0.0 || dy == 0.0) return 0.0; // degenerate: one variable constant
    return num / std::sqrt(dx * dy);
}

std::optional<double> gains_to_benefits_ratio(const GainLedger& ledger, const std::string& sc,
                                              const std::string& country) {
    auto b = ledger.sc_benefits.find(sc);
    if (b == ledger.sc_benefits.end() || b->second <= 0) return std::nullopt;
    std::int64_t gains = 0;
    auto row = ledger.sc_gains.find(sc);
    if (row != ledger.sc_gains.end()) {
        auto g = row->second.find(country);
        if (g != row->second.end()) gains = g->second;
    }
    return static_cast<double>(gains) / static_cast<double>(b->second);
}

RankTable rank_table(const GainLedger& ledger,
                     const std::map<std::string, std::int64_t>& external_pub_counts, int top_n) {
    if (top_n < 1) throw Error("rank_table: top_n must be >= 1");
    RankTable table;
    table.total_gains = 0;
    for (const auto& [country, gains] : ledger.pub_level_gains) table.total_gains += gains;

    std::int64_t world_pubs = 0;
    for (const auto& [country, n] : external_pub_counts) world_pubs += n;

    for (const auto& [country, gains] : ledger.pub_level_gains) {
        RankRow row;
        row.country = country;
        row.gains = gains;
        row.share = table.total_gains > 0
                        ? static_cast<double>(gains) / static_cast<double>(table.total_gains)
                        : 0.0;
        auto it = external_pub_counts.find(country);
        if (it != external_pub_counts.end()) {
            row.external_pub_count = it->second;
            if (world_pubs > 0)
                row.share_of_pubs =
                    static_cast<double>(it->second) / static_cast<double>(world_pubs);
            if (it->second > 0)
                row.gains_per_pub = static_cast<double>(gains) / static_cast<double>(it->second);
        } else {
            table.missing_pub_counts.push_back(country);
        }
        table.rows.push_back(std::move(row));
    }

    std::sort(table.rows.begin(), table.rows.end(), [](const RankRow& a, const RankRow& b) {
        if (a.gains != b.gains) return a.gains > b.gains;
        return a.country < b.country;
    });
    for (std::size_t i = 0; i < table.rows.size(); ++i)
        table.rows[i].rank_by_gains = static_cast<int>(i + 1);

    std::vector<std::size_t> with_counts;
    for (std::size_t i = 0; i < table.rows.size(); ++i)
        if (table.rows[i].external_pub_count) with_counts.push_back(i);
    std::sort(with_counts.begin(), with_counts.end(), [&](std::size_t a, std::size_t b) {
        const auto& ra = table.rows[a];
        const auto& rb = table.rows[b];
        if (*ra.external_pub_count != *rb.external_pub_count)
            return *ra.external_pub_count > *rb.external_pub_count;
        return ra.country < rb.country;
    });
    for (std::size_t i = 0; i < with_counts.size(); ++i)
        table.rows[with_counts[i]].rank_by_pubs = static_cast<int>(i + 1);

    if (table.rows.size() > static_cast<std::size_t>(top_n))
        table.rows.resize(static_cast<std::size_t>(top_n));
    return table;
}

std::map<std::string, std::vector<std::int64_t>> top_rank_frequencies(const GainLedger& ledger,
                                                                      int k) {
    if (k < 1) throw Error("top_rank_frequencies: k must be >= 1");
    std::map<std::string, std::vector<std::int64_t>> out;
    for (const auto& [sc, row] : ledger.sc_gains) {
        std::vector<std::pair<std::string_view, std::int64_t>> ranked;
        for (const auto& [country, gains] : row)
            if (gains > 0) ranked.emplace_back(country, gains);
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        const std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(k), ranked.size());
        for (std::size_t pos = 0; pos < top; ++pos) {
            auto& counts = out[std::string(ranked[pos].first)];
            if (counts.empty()) counts.assign(static_cast<std::size_t>(k), 0);
            ++counts[pos];
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reach reporting

std::vector<ReachRow> reach_report(const Corpus& corpus, const GainLedger& ledger,
                                   const geo::GeoRuleSet& rules, const MacroAreaMap* map,
                                   const SamplingConfig* sampling, unsigned n_threads) {
    std::vector<ReachRow> rows;
    for (const auto& [sc, benefits] : ledger.sc_benefits) {
        ReachRow row;
        row.sc = sc;
        if (map) {
            auto it = map->find(sc);
            if (it != map->end()) row.macro_area = it->second;
        }
        row.exact_reach = geographical_reach(ledger, sc);
        rows.push_back(std::move(row));
    }

    // Publication counts per SC over the source publications.
    std::unordered_map<std::string_view, std::size_t> row_idx;
    for (std::size_t i = 0; i < rows.size(); ++i) row_idx[rows[i].sc] = i;
    for (const auto& [id, n] : ledger.pub_benefits) {
        auto it = corpus.cited_index.find(id);
        if (it == corpus.cited_index.end()) continue;
        for (const auto& sc : corpus.cited[it->second].subject_categories) {
            auto r = row_idx.find(sc);
            if (r != row_idx.end()) ++rows[r->second].publication_count;
        }
    }
    for (auto& row : rows) {
        if (row.publication_count > 0)
            row.average_impact = static_cast<double>(ledger.sc_benefits.at(row.sc)) /
                                 static_cast<double>(row.publication_count);
    }

    if (sampling) {
        ReachContext ctx = make_reach_context(corpus, rules);
        if (n_threads == 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
        n_threads = std::min<unsigned>(n_threads, 64);
        std::atomic<std::size_t> next{0};
        auto work = [&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= rows.size()) break;
                auto members = sc_member_pubs(corpus, ledger, rows[i].sc);
                if (members.empty()) continue;
                auto samples = draw_samples(members, *sampling, rows[i].sc);
                std::int64_t sum = 0;
                for (const auto& s : samples) sum += subset_reach(ctx, rules, s);
                rows[i].sampled_mean_reach =
                    static_cast<double>(sum) / static_cast<double>(samples.size());
            }
        };
        if (n_threads <= 1 || rows.size() <= 1) {
            work();
        } else {
            std::vector<std::thread> workers;
            for (unsigned t = 0; t < n_threads; ++t) workers.emplace_back(work);
            for (auto& w : workers) w.join();
        }
    }
    return rows;
}

MacroAreaRanges macro_area_ranges(const std::vector<ReachRow>& rows, const MacroAreaMap& map) {
    std::vector<std::string> unmapped;
    std::map<std::string, std::vector<const ReachRow*>> by_area;
    for (const auto& row : rows) {
        auto it = map.find(row.sc);
        if (it == map.end()) {
            unmapped.push_back(row.sc);
            continue;
        }
        by_area[it->second].push_back(&row);
    }
    if (!unmapped.empty()) {
        std::string msg = "macro_area_ranges: subject categories without a macro-area:";
        for (const auto& sc : unmapped) msg += " '" + sc + "'";
        throw Error(msg);
    }

    MacroAreaRanges out;
    double reach_sum = 0.0;
    double sampled_sum = 0.0;
    std::size_t sampled_n = 0;
    for (const auto& row : rows) {
        reach_sum += static_cast<double>(row.exact_reach);
        if (row.sampled_mean_reach) {
            sampled_sum += *row.sampled_mean_reach;
            ++sampled_n;
        }
    }
    out.global_mean_reach = rows.empty() ? 0.0 : reach_sum / static_cast<double>(rows.size());
    if (sampled_n > 0) out.global_mean_sampled = sampled_sum / static_cast<double>(sampled_n);

    for (const auto& [area, members] : by_area) {
        AreaRange r;
        r.area = area;
        r.sc_count = static_cast<int>(members.size());
        r.min_reach = members.front()->exact_reach;
        r.max_reach = members.front()->exact_reach;
        double sum = 0.0, s_sum = 0.0;
        double s_min = 0.0, s_max = 0.0;
        std::size_t s_n = 0;
        for (const ReachRow* m : members) {
            r.min_reach = std::min(r.min_reach, m->exact_reach);
            r.max_reach = std::max(r.max_reach, m->exact_reach);
            sum += static_cast<double>(m->exact_reach);
            if (m->sampled_mean_reach) {
                double v = *m->sampled_mean_reach;
                if (s_n == 0) {
                    s_min = s_max = v;
                } else {
                    s_min = std::min(s_min, v);
                    s_max = std::max(s_max, v);
                }
                s_sum += v;
                ++s_n;
            }
        }
        r.mean_reach = sum / static_cast<double>(members.size());
        if (s_n > 0) {
            r.min_sampled = s_min;
            r.max_sampled = s_max;
            r.mean_sampled = s_sum / static_cast<double>(s_n);
        }
        out.areas.push_back(std::move(r));
    }
    return out;
}

ReachCorrelations reach_correlations(const std::vector<ReachRow>& rows) {
    if (rows.size() < 2) throw Error("reach_correlations: need at least two subject categories");
    std::vector<double> reach, pubs, impact;
    for (const auto& row : rows) {
        reach.push_back(static_cast<double>(row.exact_reach));
        pubs.push_back(static_cast<double>(row.publication_count));
        impact.push_back(row.average_impact);
    }
    auto constant = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
    };
    ReachCorrelations out;
    out.pubs_degenerate = constant(pubs);
    out.impact_degenerate = constant(impact);
    out.rho_reach_vs_pubs = spearman_rho(reach, pubs);
    out.rho_reach_vs_impact = spearman_rho(reach, impact);
    return out;
}

} // namespace knowflow::metrics
