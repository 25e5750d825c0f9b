#include "knowflow/geo.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace knowflow::geo {

namespace {

// Latin-1 supplement letters (U+00C0..U+00FF); '.' keeps the character.
constexpr const char* kLatin1Fold =
    "AAAAAAACEEEEIIIIDNOOOOO.OUUUUY.s"
    "aaaaaaaceeeeiiiidnooooo.ouuuuy.y";

// Latin Extended-A (U+0100..U+017F).
constexpr const char* kLatinExtAFold =
    "AaAaAaCcCcCcCcDdDdEeEeEeEeEeGgGgGgGgHhHhIiIiIiIiIiIiJjKkk"
    "LlLlLlLlLlNnNnNnnNnOoOoOoOoRrRrRrSsSsSsSsTtTtTtUuUuUuUuUuUu"
    "WwYyYZzZzZzs";

void append_folded(std::string& out, char32_t cp, std::string_view original) {
    if (cp >= 0xC0 && cp <= 0xFF) {
        char c = kLatin1Fold[cp - 0xC0];
        if (c != '.') {
            out.push_back(c);
            return;
        }
    } else if (cp >= 0x100 && cp <= 0x17F) {
        out.push_back(kLatinExtAFold[cp - 0x100]);
        return;
    }
    out.append(original);
}

} // namespace

std::string match_key(std::string_view raw) {
    std::string trimmed = trim(raw);
    std::string folded;
    folded.reserve(trimmed.size());
    for (size_t i = 0; i < trimmed.size();) {
        unsigned char b0 = static_cast<unsigned char>(trimmed[i]);
        if (b0 < 0x80) {
            folded.push_back(static_cast<char>(b0));
            ++i;
        } else if ((b0 & 0xE0) == 0xC0 && i + 1 < trimmed.size()) {
            char32_t cp = static_cast<char32_t>((b0 & 0x1F) << 6) |
                          (static_cast<unsigned char>(trimmed[i + 1]) & 0x3F);
            append_folded(folded, cp, trimmed.substr(i, 2));
            i += 2;
        } else {
            // 3/4-byte sequences and stray bytes pass through unchanged.
            folded.push_back(static_cast<char>(b0));
            ++i;
        }
    }
    for (char& c : folded) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return folded;
}

GeoRuleSet::GeoRuleSet(std::set<std::string> canonical,
                       std::map<std::string, std::string> merges,
                       std::vector<SplitEvent> splits)
    : canonical_(std::move(canonical)), merges_(std::move(merges)), splits_(std::move(splits)) {
    for (auto& ev : splits_) {
        std::sort(ev.successors.begin(), ev.successors.end());
        predecessors_.insert(ev.predecessor);
    }
    for (const auto& [raw, target] : merges_) {
        auto [it, inserted] = merge_index_.emplace(match_key(raw), target);
        if (!inserted && it->second != target)
            throw Error("georules: raw name '" + raw + "' maps to two codes ('" + it->second +
                        "' and '" + target + "')");
    }
    validate();
}

void GeoRuleSet::validate() const {
    for (const auto& [raw, target] : merges_) {
        if (!canonical_.empty() && !canonical_.contains(target) && !predecessors_.contains(target))
            throw Error("georules: merge target '" + target + "' is neither canonical nor a split predecessor");
        // Targets must be fixed points, otherwise normalize is not idempotent.
        auto it = merge_index_.find(match_key(target));
        if (it != merge_index_.end() && it->second != target)
            throw Error("georules: merge target '" + target + "' is itself remapped to '" + it->second + "'");
    }
    for (const auto& ev : splits_) {
        if (ev.successors.empty())
            throw Error("georules: split of '" + ev.predecessor + "' has no successors");
        if (std::adjacent_find(ev.successors.begin(), ev.successors.end()) != ev.successors.end())
            throw Error("georules: split of '" + ev.predecessor + "' lists a successor twice");
        if (canonical_.contains(ev.predecessor))
            throw Error("georules: split predecessor '" + ev.predecessor +
                        "' must not be listed as canonical");
        if (!canonical_.empty()) {
            for (const auto& s : ev.successors)
                if (!canonical_.contains(s))
                    throw Error("georules: split successor '" + s + "' is not canonical");
        }
    }
}

GeoRuleSet GeoRuleSet::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open georules file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str(), path);
}

GeoRuleSet GeoRuleSet::from_json_text(const std::string& text, const std::string& origin) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(origin + ": invalid JSON: " + e.what());
    }
    std::set<std::string> canonical;
    std::map<std::string, std::string> merges;
    std::vector<SplitEvent> splits;
    try {
        for (const auto& c : j.value("canonical", nlohmann::json::array()))
            canonical.insert(c.get<std::string>());
        if (j.contains("merges"))
            for (const auto& [raw, target] : j.at("merges").items())
                merges[raw] = target.get<std::string>();
        for (const auto& s : j.value("splits", nlohmann::json::array())) {
            SplitEvent ev;
            ev.predecessor = s.at("predecessor").get<std::string>();
            for (const auto& succ : s.at("successors")) ev.successors.push_back(succ.get<std::string>());
            ev.split_year = s.at("year").get<int>();
            splits.push_back(std::move(ev));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(origin + ": bad georules schema: " + e.what());
    }
    return GeoRuleSet(std::move(canonical), std::move(merges), std::move(splits));
}

std::string GeoRuleSet::normalize(const std::string& raw_country) const {
    auto it = merge_index_.find(match_key(raw_country));
    if (it != merge_index_.end()) return it->second;
    return trim(raw_country);
}

bool GeoRuleSet::is_known(const std::string& code) const {
    return canonical_.contains(code) || predecessors_.contains(code);
}

bool GeoRuleSet::is_predecessor(const std::string& code) const {
    return predecessors_.contains(code);
}

CountryTally reassign_splits(const CountryTally& tally,
                             const CountryTally& per_successor_post_split,
                             const GeoRuleSet& rules,
                             std::vector<std::string>* diagnostics) {
    CountryTally out = tally;
    for (const auto& ev : rules.splits()) {
        auto pred = out.find(ev.predecessor);
        if (pred == out.end()) continue;
        const std::int64_t total = pred->second;
        out.erase(pred);
        if (total == 0) continue;

        std::vector<std::int64_t> weights;
        weights.reserve(ev.successors.size());
        std::int64_t weight_sum = 0;
        for (const auto& s : ev.successors) {
            auto w = per_successor_post_split.find(s);
            std::int64_t v = (w == per_successor_post_split.end()) ? 0 : w->second;
            weights.push_back(v);
            weight_sum += v;
        }
        if (weight_sum == 0) {
            weights.assign(ev.successors.size(), 1);
            weight_sum = static_cast<std::int64_t>(ev.successors.size());
            if (diagnostics)
                diagnostics->push_back("split '" + ev.predecessor +
                                       "': no post-split counts for any successor, distributed equally");
        }

        // Largest-remainder apportionment in exact integer arithmetic.
        const size_t n = ev.successors.size();
        std::vector<std::int64_t> alloc(n);
        std::vector<__int128> remainder(n);
        std::int64_t allocated = 0;
        for (size_t i = 0; i < n; ++i) {
            __int128 num = static_cast<__int128>(total) * weights[i];
            alloc[i] = static_cast<std::int64_t>(num / weight_sum);
            remainder[i] = num % weight_sum;
            allocated += alloc[i];
        }
        std::vector<size_t> order(n);
        for (size_t i = 0; i < n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            if (remainder[a] != remainder[b]) return remainder[a] > remainder[b];
            return ev.successors[a] < ev.successors[b];
        });
        const std::int64_t leftover = total - allocated; // always < n
        for (std::int64_t i = 0; i < leftover; ++i) ++alloc[order[static_cast<size_t>(i)]];

        for (size_t i = 0; i < n; ++i)
            if (alloc[i] > 0) out[ev.successors[i]] += alloc[i];
    }
    return out;
}

} // namespace knowflow::geo
