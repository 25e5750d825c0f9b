#include "knowflow/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "knowflow/geo.hpp"

namespace knowflow {

DocType doc_type_from_string(std::string_view s) {
    std::string k = geo::match_key(s);
    if (k == "article") return DocType::article;
    if (k == "review") return DocType::review;
    if (k == "letter") return DocType::letter;
    if (k == "proceedings" || k == "proceedings paper" || k == "conference proceedings" ||
        k == "conference paper")
        return DocType::proceedings;
    return DocType::other;
}

std::string_view to_string(DocType t) {
    switch (t) {
        case DocType::article: return "article";
        case DocType::review: return "review";
        case DocType::letter: return "letter";
        case DocType::proceedings: return "proceedings";
        case DocType::other: return "other";
    }
    return "other";
}

void Corpus::reindex() {
    cited_index.clear();
    citing_index.clear();
    cited_index.reserve(cited.size());
    citing_index.reserve(citing.size());
    for (std::size_t i = 0; i < cited.size(); ++i) cited_index.emplace(cited[i].id, i);
    for (std::size_t i = 0; i < citing.size(); ++i) citing_index.emplace(citing[i].id, i);
}

namespace {

[[noreturn]] void fail_at(const std::string& file, std::size_t line, const std::string& msg) {
    throw Error(file + ":" + std::to_string(line) + ": " + msg);
}

std::string read_whole_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct PubParseStats {
    std::size_t records = 0;
    std::size_t dropped_addresses = 0;
    std::size_t without_country = 0;
};

Publication parse_publication(const nlohmann::json& j, bool cited_side, const std::string& file,
                              std::size_t line, PubParseStats& stats) {
    Publication p;
    if (!j.contains("id") || !j.at("id").is_string() || j.at("id").get<std::string>().empty())
        fail_at(file, line, "missing or empty 'id'");
    p.id = j.at("id").get<std::string>();
    if (!j.contains("year") || !j.at("year").is_number_integer())
        fail_at(file, line, "record '" + p.id + "': missing integer 'year'");
    p.year = j.at("year").get<int>();

    if (j.contains("doc_type")) {
        if (!j.at("doc_type").is_string())
            fail_at(file, line, "record '" + p.id + "': 'doc_type' must be a string");
        p.doc_type = doc_type_from_string(j.at("doc_type").get<std::string>());
    } else if (cited_side) {
        fail_at(file, line, "record '" + p.id + "': cited publications require 'doc_type'");
    }

    if (j.contains("affiliations")) {
        if (!j.at("affiliations").is_array())
            fail_at(file, line, "record '" + p.id + "': 'affiliations' must be an array");
        for (const auto& a : j.at("affiliations")) {
            if (!a.is_object())
                fail_at(file, line, "record '" + p.id + "': affiliation entries must be objects");
            std::string country = a.contains("country") && a.at("country").is_string()
                                      ? trim(a.at("country").get<std::string>())
                                      : std::string();
            if (country.empty()) {
                // Addresses without country indication are excluded.
                ++stats.dropped_addresses;
                continue;
            }
            Affiliation aff;
            aff.institution = a.value("institution", std::string());
            aff.raw_country = std::move(country);
            aff.record_date = p.year;
            p.affiliations.push_back(std::move(aff));
        }
    }
    if (cited_side && p.affiliations.empty())
        fail_at(file, line, "cited publication '" + p.id + "' has no affiliation with a country");
    if (!cited_side && p.affiliations.empty()) ++stats.without_country;

    if (j.contains("subject_categories")) {
        if (!j.at("subject_categories").is_array())
            fail_at(file, line, "record '" + p.id + "': 'subject_categories' must be an array");
        for (const auto& sc : j.at("subject_categories")) {
            if (!sc.is_string())
                fail_at(file, line, "record '" + p.id + "': subject categories must be strings");
            std::string s = trim(sc.get<std::string>());
            if (!s.empty()) p.subject_categories.push_back(std::move(s));
        }
        std::sort(p.subject_categories.begin(), p.subject_categories.end());
        p.subject_categories.erase(
            std::unique(p.subject_categories.begin(), p.subject_categories.end()),
            p.subject_categories.end());
    }
    if (cited_side && p.subject_categories.empty())
        fail_at(file, line, "cited publication '" + p.id + "' has no subject category");

    ++stats.records;
    return p;
}

struct PubFile {
    std::vector<Publication> pubs;
    PubParseStats stats;
};

PubFile load_publication_file(const std::string& path, bool cited_side) {
    PubFile out;
    const std::string text = read_whole_file(path);
    std::size_t line_no = 0;
    std::size_t pos = 0;
    std::unordered_set<std::string> seen;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        ++line_no;
        std::string_view raw(text.data() + pos, nl - pos);
        pos = nl + 1;
        if (trim(raw).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(raw);
        } catch (const nlohmann::json::exception& e) {
            fail_at(path, line_no, std::string("malformed JSON: ") + e.what());
        }
        Publication p = parse_publication(j, cited_side, path, line_no, out.stats);
        if (!seen.insert(p.id).second)
            fail_at(path, line_no, "duplicate publication id '" + p.id + "'");
        out.pubs.push_back(std::move(p));
    }
    return out;
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

std::vector<CitationLink> load_links_file(const std::string& path) {
    std::vector<CitationLink> links;
    const std::string text = read_whole_file(path);
    const bool csv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    int citing_col = 0, cited_col = 1;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        ++line_no;
        std::string_view raw(text.data() + pos, nl - pos);
        pos = nl + 1;
        if (trim(raw).empty()) continue;

        if (csv) {
            auto fields = split_csv_line(raw);
            if (line_no == 1) {
                if (fields.size() != 2)
                    fail_at(path, line_no, "links CSV header must have exactly two columns");
                std::string a = trim(fields[0]), b = trim(fields[1]);
                if (a == "citing_id" && b == "cited_id") {
                    citing_col = 0;
                    cited_col = 1;
                } else if (a == "cited_id" && b == "citing_id") {
                    citing_col = 1;
                    cited_col = 0;
                } else {
                    fail_at(path, line_no, "links CSV header must name citing_id and cited_id");
                }
                continue;
            }
            if (fields.size() != 2) fail_at(path, line_no, "expected two CSV fields");
            CitationLink l;
            l.citing_id = trim(fields[static_cast<std::size_t>(citing_col)]);
            l.cited_id = trim(fields[static_cast<std::size_t>(cited_col)]);
            if (l.citing_id.empty() || l.cited_id.empty()) fail_at(path, line_no, "empty link id");
            links.push_back(std::move(l));
        } else {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(raw);
            } catch (const nlohmann::json::exception& e) {
                fail_at(path, line_no, std::string("malformed JSON: ") + e.what());
            }
            if (!j.contains("citing_id") || !j.contains("cited_id"))
                fail_at(path, line_no, "link record requires 'citing_id' and 'cited_id'");
            CitationLink l;
            l.citing_id = j.at("citing_id").get<std::string>();
            l.cited_id = j.at("cited_id").get<std::string>();
            if (l.citing_id.empty() || l.cited_id.empty()) fail_at(path, line_no, "empty link id");
            links.push_back(std::move(l));
        }
    }
    return links;
}

std::string join_sample(const std::vector<std::string>& ids, std::size_t limit = 10) {
    std::string out;
    for (std::size_t i = 0; i < ids.size() && i < limit; ++i) {
        if (i) out += ", ";
        out += "'" + ids[i] + "'";
    }
    if (ids.size() > limit) out += ", ... (" + std::to_string(ids.size()) + " total)";
    return out;
}

} // namespace

Corpus load_corpus(const std::string& cited_path,
                   const std::string& citing_path,
                   const std::string& links_path,
                   const std::string& source_country,
                   ValidationSummary* summary) {
    auto cited_f = std::async(std::launch::async, load_publication_file, cited_path, true);
    auto citing_f = std::async(std::launch::async, load_publication_file, citing_path, false);
    auto links_f = std::async(std::launch::async, load_links_file, links_path);

    Corpus corpus;
    PubFile cited = cited_f.get();
    PubFile citing = citing_f.get();
    corpus.cited = std::move(cited.pubs);
    corpus.citing = std::move(citing.pubs);
    corpus.links = links_f.get();
    corpus.source_country = source_country;
    corpus.reindex();

    std::vector<std::string> dangling;
    std::vector<std::string> duplicates;
    std::unordered_set<std::uint64_t> seen_pairs;
    seen_pairs.reserve(corpus.links.size() * 2);
    for (const auto& l : corpus.links) {
        if (l.citing_id == l.cited_id) {
            dangling.push_back(l.citing_id + " cites itself");
            continue;
        }
        auto citing_it = corpus.citing_index.find(l.citing_id);
        auto cited_it = corpus.cited_index.find(l.cited_id);
        if (citing_it == corpus.citing_index.end()) dangling.push_back(l.citing_id);
        if (cited_it == corpus.cited_index.end()) dangling.push_back(l.cited_id);
        if (citing_it == corpus.citing_index.end() || cited_it == corpus.cited_index.end()) continue;
        std::uint64_t key = (static_cast<std::uint64_t>(citing_it->second) << 32) |
                            static_cast<std::uint64_t>(cited_it->second);
        if (!seen_pairs.insert(key).second) duplicates.push_back(l.citing_id + " -> " + l.cited_id);
    }
    if (!dangling.empty()) {
        std::sort(dangling.begin(), dangling.end());
        dangling.erase(std::unique(dangling.begin(), dangling.end()), dangling.end());
        throw Error(links_path + ": links reference unknown or invalid ids: " + join_sample(dangling));
    }
    if (!duplicates.empty()) {
        if (summary) summary->duplicate_links_rejected = duplicates.size();
        throw Error(links_path + ": duplicate citation links: " + join_sample(duplicates));
    }

    if (summary) {
        summary->cited_records = cited.stats.records;
        summary->citing_records = citing.stats.records;
        summary->link_records = corpus.links.size();
        summary->dropped_addresses = cited.stats.dropped_addresses + citing.stats.dropped_addresses;
        summary->citing_without_country = citing.stats.without_country;
        summary->duplicate_links_rejected = 0;
    }
    return corpus;
}

Corpus filter_cited_doc_types(const Corpus& corpus, const std::set<DocType>& allowed) {
    if (allowed.empty()) throw Error("filter_cited_doc_types: allowed set must not be empty");
    Corpus out;
    out.source_country = corpus.source_country;
    out.citing = corpus.citing;
    std::unordered_set<std::string> kept;
    kept.reserve(corpus.cited.size());
    for (const auto& p : corpus.cited) {
        if (allowed.contains(p.doc_type)) {
            kept.insert(p.id);
            out.cited.push_back(p);
        }
    }
    for (const auto& l : corpus.links)
        if (kept.contains(l.cited_id)) out.links.push_back(l);
    out.reindex();
    return out;
}

namespace {

nlohmann::ordered_json publication_to_json(const Publication& p, bool with_scs) {
    nlohmann::ordered_json j;
    j["id"] = p.id;
    j["year"] = p.year;
    j["doc_type"] = to_string(p.doc_type);
    nlohmann::ordered_json affs = nlohmann::ordered_json::array();
    for (const auto& a : p.affiliations)
        affs.push_back({{"institution", a.institution}, {"country", a.raw_country}});
    j["affiliations"] = std::move(affs);
    if (with_scs) j["subject_categories"] = p.subject_categories;
    return j;
}

} // namespace

void save_corpus(const Corpus& corpus,
                 const std::string& cited_path,
                 const std::string& citing_path,
                 const std::string& links_path) {
    std::ofstream cited(cited_path, std::ios::binary);
    if (!cited) throw Error("cannot write " + cited_path);
    for (const auto& p : corpus.cited) cited << publication_to_json(p, true).dump() << '\n';

    std::ofstream citing(citing_path, std::ios::binary);
    if (!citing) throw Error("cannot write " + citing_path);
    for (const auto& p : corpus.citing)
        citing << publication_to_json(p, !p.subject_categories.empty()).dump() << '\n';

    std::ofstream links(links_path, std::ios::binary);
    if (!links) throw Error("cannot write " + links_path);
    for (const auto& l : corpus.links) {
        nlohmann::ordered_json j{{"citing_id", l.citing_id}, {"cited_id", l.cited_id}};
        links << j.dump() << '\n';
    }
}

} // namespace knowflow
