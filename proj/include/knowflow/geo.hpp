#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "knowflow/common.hpp"

namespace knowflow::geo {

// Generic integer carrier for per-country counts (gains or benefits).
// Ordered by country code so that iteration and tie-breaking are
// deterministic.
using CountryTally = std::map<std::string, std::int64_t>;

// A dissolved country whose accumulated counts get redistributed to its
// successor states.
struct SplitEvent {
    std::string predecessor;
    std::vector<std::string> successors; // sorted, pairwise distinct
    int split_year = 0;

    bool operator==(const SplitEvent&) const = default;
};

// Normalization key: trimmed, lowercased, common Latin diacritics folded
// to ASCII. Matching is exact on this key; no fuzzy matching.
std::string match_key(std::string_view raw);

// Country merge rules and dated split events. Immutable once constructed,
// safe to share across threads.
class GeoRuleSet {
public:
    GeoRuleSet() = default;
    GeoRuleSet(std::set<std::string> canonical,
               std::map<std::string, std::string> merges,
               std::vector<SplitEvent> splits);

    static GeoRuleSet from_file(const std::string& path);
    static GeoRuleSet from_json_text(const std::string& text, const std::string& origin);

    // Merge target if a rule matches, otherwise the trimmed input as its
    // own code. Split predecessors pass through for later reassignment.
    std::string normalize(const std::string& raw_country) const;

    // A code the rule set knows about: canonical, or a split predecessor.
    bool is_known(const std::string& code) const;
    bool is_predecessor(const std::string& code) const;

    const std::set<std::string>& canonical() const { return canonical_; }
    const std::vector<SplitEvent>& splits() const { return splits_; }
    const std::map<std::string, std::string>& merges() const { return merges_; }

private:
    void validate() const;

    std::set<std::string> canonical_;
    std::map<std::string, std::string> merges_;       // raw name (verbatim) -> target
    std::map<std::string, std::string> merge_index_;  // match_key(raw) -> target
    std::vector<SplitEvent> splits_;
    std::set<std::string> predecessors_;
};

// Redistributes every split predecessor's count to its successors,
// proportionally to the successors' post-split counts. Integer-exact:
// the grand total is conserved via largest-remainder apportionment, with
// remainder ties broken by ascending country code. Predecessors with all
// successor weights zero are split equally and reported through
// `diagnostics` when given.
CountryTally reassign_splits(const CountryTally& tally,
                             const CountryTally& per_successor_post_split,
                             const GeoRuleSet& rules,
                             std::vector<std::string>* diagnostics = nullptr);

} // namespace knowflow::geo
