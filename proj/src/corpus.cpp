#include "novscope/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_set>

#include <json.hpp>

#include "novscope/error.hpp"

namespace novscope {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxIdBytes = 256;

// Latin-1 supplement and Latin Extended-A folded to ASCII, indexed from U+00C0.
// Entries that are not letters fold to an empty string.
const char* const kFoldTable[] = {
    // U+00C0..U+00FF
    "a", "a", "a", "a", "a", "a", "ae", "c", "e", "e", "e", "e", "i", "i", "i", "i",
    "d", "n", "o", "o", "o", "o", "o", "", "o", "u", "u", "u", "u", "y", "th", "ss",
    "a", "a", "a", "a", "a", "a", "ae", "c", "e", "e", "e", "e", "i", "i", "i", "i",
    "d", "n", "o", "o", "o", "o", "o", "", "o", "u", "u", "u", "u", "y", "th", "y",
    // U+0100..U+017F
    "a", "a", "a", "a", "a", "a", "c", "c", "c", "c", "c", "c", "c", "c", "d", "d",
    "d", "d", "e", "e", "e", "e", "e", "e", "e", "e", "e", "e", "g", "g", "g", "g",
    "g", "g", "g", "g", "h", "h", "h", "h", "i", "i", "i", "i", "i", "i", "i", "i",
    "i", "i", "ij", "ij", "j", "j", "k", "k", "k", "l", "l", "l", "l", "l", "l", "l",
    "l", "l", "l", "n", "n", "n", "n", "n", "n", "n", "n", "n", "o", "o", "o", "o",
    "o", "o", "oe", "oe", "r", "r", "r", "r", "r", "r", "s", "s", "s", "s", "s", "s",
    "s", "s", "t", "t", "t", "t", "t", "t", "u", "u", "u", "u", "u", "u", "u", "u",
    "u", "u", "u", "u", "w", "w", "y", "y", "y", "z", "z", "z", "z", "z", "z", "s",
};

std::string_view trim(std::string_view s) {
    auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && ws(s.front())) s.remove_prefix(1);
    while (!s.empty() && ws(s.back())) s.remove_suffix(1);
    return s;
}

std::string require_id(const json& j, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_string()) throw ValidationError(std::string(key) + " must be a string");
    auto s = v.get<std::string>();
    if (s.empty() || s.size() > kMaxIdBytes)
        throw ValidationError(std::string(key) + " must be a non-empty id of at most 256 bytes");
    return s;
}

std::optional<std::string> optional_string(const json& j, const char* key) {
    const auto& v = j.at(key);
    if (v.is_null()) return std::nullopt;
    if (!v.is_string()) throw ValidationError(std::string(key) + " must be a string or null");
    return v.get<std::string>();
}

std::optional<int> optional_int(const json& j, const char* key) {
    const auto& v = j.at(key);
    if (v.is_null()) return std::nullopt;
    if (!v.is_number_integer()) throw ValidationError(std::string(key) + " must be an integer");
    return v.get<int>();
}

std::optional<double> optional_nonneg(const json& j, const char* key) {
    const auto& v = j.at(key);
    if (v.is_null()) return std::nullopt;
    if (!v.is_number()) throw ValidationError(std::string(key) + " must be a number");
    double x = v.get<double>();
    if (!(x >= 0.0)) throw ValidationError(std::string(key) + " must be nonnegative");
    return x;
}

std::vector<std::string> id_list(const json& j, const char* key, bool dedup) {
    const auto& v = j.at(key);
    std::vector<std::string> out;
    if (v.is_null()) return out;
    if (!v.is_array()) throw ValidationError(std::string(key) + " must be an array");
    std::unordered_set<std::string> seen;
    for (const auto& e : v) {
        if (!e.is_string()) throw ValidationError(std::string(key) + " entries must be strings");
        auto s = e.get<std::string>();
        if (s.empty() || s.size() > kMaxIdBytes)
            throw ValidationError(std::string(key) + " entry is not a valid id");
        if (dedup && !seen.insert(s).second) continue;
        out.push_back(std::move(s));
    }
    return out;
}

void require_exact_keys(const json& j, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw ValidationError("line is not a JSON object");
    if (j.size() != keys.size()) throw ValidationError("unexpected key set");
    for (const char* k : keys)
        if (!j.contains(k)) throw ValidationError(std::string("missing key ") + k);
}

json parse_json(std::string_view line) {
    try {
        return json::parse(line);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("invalid JSON: ") + e.what());
    }
}

json opt_json(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }
template <typename T>
json opt_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

// Streams non-blank lines of `path` through `handle`, counting malformed ones.
void for_each_line(const std::filesystem::path& path, const IngestConfig& cfg,
                   IngestReport& report, const std::function<void(std::string_view)>& handle,
                   bool skip_header_like = false) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read " + path.string());
    std::string line;
    std::size_t n = 0, bad = 0, lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto t = trim(line);
        if (t.empty()) continue;
        if (skip_header_like && lineno == 1 && t.substr(0, 5) == "name\t") continue;
        ++n;
        try {
            handle(t);
        } catch (const ValidationError& e) {
            ++bad;
            report.warnings.push_back(path.filename().string() + ":" + std::to_string(lineno) +
                                      ": " + e.what() + " (" + std::to_string(bad) +
                                      " malformed so far)");
        }
    }
    report.lines_read += n;
    report.malformed += bad;
    if (n > 0 && static_cast<double>(bad) > cfg.max_malformed_fraction * static_cast<double>(n))
        throw ValidationError(path.string() + ": " + std::to_string(bad) + " of " +
                              std::to_string(n) + " lines malformed");
}

}  // namespace

std::string_view to_string(Gender g) {
    switch (g) {
        case Gender::female: return "female";
        case Gender::male: return "male";
        default: return "unknown";
    }
}

std::string normalize_name(std::string_view name) {
    name = trim(name);
    std::string out;
    out.reserve(name.size());
    for (std::size_t i = 0; i < name.size();) {
        auto c = static_cast<unsigned char>(name[i]);
        if (c < 0x80) {
            out.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c + ('a' - 'A') : c));
            ++i;
            continue;
        }
        if ((c & 0xE0) == 0xC0 && i + 1 < name.size()) {
            unsigned cp = ((c & 0x1Fu) << 6) | (static_cast<unsigned char>(name[i + 1]) & 0x3Fu);
            if (cp >= 0xC0 && cp <= 0x17F) {
                out += kFoldTable[cp - 0xC0];
            } else {
                out.append(name.substr(i, 2));
            }
            i += 2;
            continue;
        }
        out.push_back(static_cast<char>(c));
        ++i;
    }
    return out;
}

bool is_initial(std::string_view name) {
    auto n = normalize_name(name);
    if (n.empty()) return true;
    if (n.size() == 1) return true;
    // Sequences like "j." or "j.r." consist only of single letters each followed by a period.
    if (n.size() % 2 != 0) return false;
    for (std::size_t i = 0; i < n.size(); i += 2)
        if (n[i + 1] != '.' || n[i] == '.') return false;
    return true;
}

NameTable::NameTable(const std::vector<NameEvidence>& rows) {
    for (const auto& r : rows) {
        auto key = normalize_name(r.name);
        if (by_name_.contains(key)) continue;
        by_name_.emplace(key, rows_.size());
        rows_.push_back(r);
    }
}

const NameEvidence* NameTable::find(std::string_view name) const {
    auto it = by_name_.find(normalize_name(name));
    return it == by_name_.end() ? nullptr : &rows_[it->second];
}

Gender resolve_gender(const NameEvidence* first, const NameEvidence* middle,
                      const IngestConfig& cfg) {
    auto confident = [&](const NameEvidence* e) -> std::optional<Gender> {
        if (e == nullptr || is_initial(e->name)) return std::nullopt;
        if (e->inferred_gender == Gender::unknown) return std::nullopt;
        if (e->count > cfg.min_name_count || e->probability > cfg.min_name_probability)
            return e->inferred_gender;
        return std::nullopt;
    };
    auto f = confident(first);
    auto m = confident(middle);
    if (f && m) return *f == *m ? *f : Gender::unknown;
    if (f) return *f;
    if (m) return *m;
    return Gender::unknown;
}

Gender resolve_gender(const std::optional<NameEvidence>& first,
                      const std::optional<NameEvidence>& middle, const IngestConfig& cfg) {
    return resolve_gender(first ? &*first : nullptr, middle ? &*middle : nullptr, cfg);
}

std::optional<int> compute_career_age(const AuthorRecord& author, int focal_year,
                                      const IngestConfig& cfg) {
    if (!author.first_pub_year || author.n_papers == 1) return std::nullopt;
    int age = focal_year - *author.first_pub_year;
    if (age < 0 || age > cfg.max_career_age) return std::nullopt;
    return age;
}

// ---------------------------------------------------------------------------
// Line formats

PaperRecord parse_paper_line(std::string_view line) {
    auto j = parse_json(line);
    require_exact_keys(j, {"paper_id", "year", "journal_id", "concept_ids_l3", "field_ids_l1",
                           "discipline_ids_l0", "referenced_journal_ids", "author_ids",
                           "institution_id", "open_access", "jif_2y", "jif_5y", "n_grants"});
    PaperRecord p;
    p.paper_id = require_id(j, "paper_id");
    auto year = optional_int(j, "year");
    if (!year) throw ValidationError("year is required");
    p.year = *year;
    auto journal = optional_string(j, "journal_id");
    p.journal_id = journal.value_or("");
    p.concept_ids_l3 = id_list(j, "concept_ids_l3", true);
    p.field_ids_l1 = id_list(j, "field_ids_l1", true);
    p.discipline_ids_l0 = id_list(j, "discipline_ids_l0", true);
    p.referenced_journal_ids = id_list(j, "referenced_journal_ids", false);
    p.author_ids = id_list(j, "author_ids", true);
    p.institution_id = optional_string(j, "institution_id");
    const auto& oa = j.at("open_access");
    if (oa.is_boolean()) {
        p.open_access = oa.get<bool>();
    } else if (!oa.is_null()) {
        throw ValidationError("open_access must be boolean");
    }
    p.jif_2y = optional_nonneg(j, "jif_2y");
    p.jif_5y = optional_nonneg(j, "jif_5y");
    p.n_grants = optional_int(j, "n_grants");
    if (p.n_grants && *p.n_grants < 0) throw ValidationError("n_grants must be nonnegative");
    return p;
}

AuthorRecord parse_author_line(std::string_view line) {
    auto j = parse_json(line);
    require_exact_keys(j, {"author_id", "first_name", "middle_name", "first_pub_year"});
    AuthorRecord a;
    a.author_id = require_id(j, "author_id");
    a.first_name = optional_string(j, "first_name");
    a.middle_name = optional_string(j, "middle_name");
    a.first_pub_year = optional_int(j, "first_pub_year");
    return a;
}

CitationEdge parse_citation_line(std::string_view line) {
    auto j = parse_json(line);
    require_exact_keys(j, {"citing_id", "cited_id", "citing_year"});
    CitationEdge c;
    c.citing_id = require_id(j, "citing_id");
    c.cited_id = require_id(j, "cited_id");
    auto y = optional_int(j, "citing_year");
    if (!y) throw ValidationError("citing_year is required");
    c.citing_year = *y;
    return c;
}

NameEvidence parse_name_line(std::string_view line) {
    std::vector<std::string_view> cols;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == '\t') {
            cols.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    if (cols.size() != 4) throw ValidationError("names.tsv rows need 4 tab-separated columns");
    NameEvidence n;
    n.name = std::string(trim(cols[0]));
    if (n.name.empty()) throw ValidationError("empty name");
    auto g = normalize_name(cols[1]);
    if (g == "female" || g == "f") {
        n.inferred_gender = Gender::female;
    } else if (g == "male" || g == "m") {
        n.inferred_gender = Gender::male;
    } else {
        throw ValidationError("gender must be female or male");
    }
    try {
        std::size_t used = 0;
        std::string p(trim(cols[2])), c(trim(cols[3]));
        n.probability = std::stod(p, &used);
        if (used != p.size()) throw ValidationError("bad probability");
        n.count = std::stoll(c, &used);
        if (used != c.size()) throw ValidationError("bad count");
    } catch (const std::logic_error&) {
        throw ValidationError("probability and count must be numeric");
    }
    if (!(n.probability >= 0.0 && n.probability <= 1.0))
        throw ValidationError("probability outside [0,1]");
    if (n.count < 0) throw ValidationError("count must be nonnegative");
    return n;
}

std::string format_paper_line(const PaperRecord& p) {
    json j;
    j["paper_id"] = p.paper_id;
    j["year"] = p.year;
    j["journal_id"] = p.journal_id.empty() ? json(nullptr) : json(p.journal_id);
    j["concept_ids_l3"] = p.concept_ids_l3;
    j["field_ids_l1"] = p.field_ids_l1;
    j["discipline_ids_l0"] = p.discipline_ids_l0;
    j["referenced_journal_ids"] = p.referenced_journal_ids;
    j["author_ids"] = p.author_ids;
    j["institution_id"] = opt_json(p.institution_id);
    j["open_access"] = p.open_access;
    j["jif_2y"] = opt_json(p.jif_2y);
    j["jif_5y"] = opt_json(p.jif_5y);
    j["n_grants"] = opt_json(p.n_grants);
    return j.dump();
}

std::string format_author_line(const AuthorRecord& a) {
    json j;
    j["author_id"] = a.author_id;
    j["first_name"] = opt_json(a.first_name);
    j["middle_name"] = opt_json(a.middle_name);
    j["first_pub_year"] = opt_json(a.first_pub_year);
    return j.dump();
}

std::string format_citation_line(const CitationEdge& c) {
    json j;
    j["citing_id"] = c.citing_id;
    j["cited_id"] = c.cited_id;
    j["citing_year"] = c.citing_year;
    return j.dump();
}

std::string format_name_line(const NameEvidence& n) {
    std::ostringstream os;
    os.precision(17);
    os << n.name << '\t' << to_string(n.inferred_gender) << '\t' << n.probability << '\t'
       << n.count;
    return os.str();
}

// ---------------------------------------------------------------------------
// Corpus

Corpus::Corpus(std::vector<PaperRecord> papers, std::vector<AuthorRecord> authors,
               std::vector<CitationEdge> citations, NameTable names, IngestConfig cfg,
               IngestReport report)
    : names_(std::move(names)), cfg_(std::move(cfg)), report_(std::move(report)) {
    papers_.reserve(papers.size());
    for (auto& p : papers) {
        if ((cfg_.year_min && p.year < *cfg_.year_min) ||
            (cfg_.year_max && p.year > *cfg_.year_max)) {
            ++report_.out_of_range;
            continue;
        }
        if (paper_index_.contains(p.paper_id)) {
            ++report_.duplicates;
            report_.warnings.push_back("duplicate paper_id " + p.paper_id + " dropped");
            continue;
        }
        paper_index_.emplace(p.paper_id, papers_.size());
        papers_.push_back(std::move(p));
    }
    if (papers_.empty()) throw ValidationError("empty corpus");

    for (auto& a : authors) {
        if (author_index_.contains(a.author_id)) {
            ++report_.duplicates;
            report_.warnings.push_back("duplicate author_id " + a.author_id + " dropped");
            continue;
        }
        const NameEvidence* first = nullptr;
        const NameEvidence* middle = nullptr;
        if (a.first_name && !is_initial(*a.first_name)) first = names_.find(*a.first_name);
        if (a.middle_name && !is_initial(*a.middle_name)) middle = names_.find(*a.middle_name);
        a.resolved_gender = resolve_gender(first, middle, cfg_);
        a.n_papers = 0;
        author_index_.emplace(a.author_id, authors_.size());
        authors_.push_back(std::move(a));
    }

    std::set<std::pair<std::string, std::string>> seen_edges;
    for (auto& c : citations) {
        if (c.citing_id == c.cited_id) {
            ++report_.self_citations;
            continue;
        }
        if (!seen_edges.emplace(c.citing_id, c.cited_id).second) continue;
        citations_.push_back(std::move(c));
    }

    for (std::size_t i = 0; i < papers_.size(); ++i) {
        const auto& p = papers_[i];
        for (const auto& aid : p.author_ids) {
            author_papers_[aid].push_back(i);
            if (auto it = author_index_.find(aid); it != author_index_.end())
                ++authors_[it->second].n_papers;
        }
        if (p.institution_id) {
            for (const auto& f : p.field_ids_l1) ++dept_counts_[{*p.institution_id, p.year, f}];
        }
        if (p.author_ids.size() == 1) {
            const auto* a = find_author(p.author_ids.front());
            if (a != nullptr && a->resolved_gender != Gender::unknown) {
                for (const auto& f : p.field_ids_l1) {
                    auto& cell = solo_by_field_year_[f][p.year];
                    cell.first += a->resolved_gender == Gender::female ? 1 : 0;
                    cell.second += 1;
                }
            }
        }
    }
}

const PaperRecord* Corpus::find_paper(std::string_view id) const {
    auto it = paper_index_.find(std::string(id));
    return it == paper_index_.end() ? nullptr : &papers_[it->second];
}

const AuthorRecord* Corpus::find_author(std::string_view id) const {
    auto it = author_index_.find(std::string(id));
    return it == author_index_.end() ? nullptr : &authors_[it->second];
}

std::optional<std::size_t> Corpus::paper_index(std::string_view id) const {
    auto it = paper_index_.find(std::string(id));
    if (it == paper_index_.end()) return std::nullopt;
    return it->second;
}

const std::vector<std::size_t>& Corpus::papers_of_author(std::string_view author_id) const {
    static const std::vector<std::size_t> kEmpty;
    auto it = author_papers_.find(std::string(author_id));
    return it == author_papers_.end() ? kEmpty : it->second;
}

std::optional<int> Corpus::department_size(const PaperRecord& paper) const {
    if (!paper.institution_id || paper.field_ids_l1.empty()) return std::nullopt;
    int best = 0;
    for (const auto& f : paper.field_ids_l1) {
        auto it = dept_counts_.find({*paper.institution_id, paper.year, f});
        int n = it == dept_counts_.end() ? 0 : it->second;
        // The focal paper is part of the index when it belongs to this corpus.
        if (find_paper(paper.paper_id) == nullptr) ++n;
        best = std::max(best, n);
    }
    return cfg_.department_size_includes_focal ? best : best - 1;
}

FemaleShare Corpus::female_share(const PaperRecord& paper) const {
    FemaleShare out;
    for (const auto& aid : paper.author_ids) {
        const auto* a = find_author(aid);
        Gender g = a == nullptr ? Gender::unknown : a->resolved_gender;
        if (g == Gender::female) {
            ++out.n_female;
        } else if (g == Gender::male) {
            ++out.n_male;
        } else {
            ++out.n_unknown;
        }
    }
    if (out.n_female + out.n_male > 0)
        out.share = static_cast<double>(out.n_female) / (out.n_female + out.n_male);
    return out;
}

std::optional<double> Corpus::women_field_share(std::string_view field, int year) const {
    auto it = solo_by_field_year_.find(std::string(field));
    if (it == solo_by_field_year_.end()) return std::nullopt;
    int women = 0, total = 0;
    for (const auto& [y, cell] : it->second) {
        if (y > year || (y == year && !cfg_.women_share_inclusive_year)) break;
        women += cell.first;
        total += cell.second;
    }
    if (total == 0) return std::nullopt;
    return static_cast<double>(women) / total;
}

std::pair<int, int> Corpus::year_range() const {
    auto [lo, hi] = std::minmax_element(papers_.begin(), papers_.end(),
                                        [](const auto& a, const auto& b) { return a.year < b.year; });
    return {lo->year, hi->year};
}

std::optional<int> compute_department_size(const PaperRecord& paper, const Corpus& corpus) {
    return corpus.department_size(paper);
}

FemaleShare compute_female_share(const PaperRecord& paper, const Corpus& corpus) {
    return corpus.female_share(paper);
}

std::optional<double> compute_women_field_share(std::string_view field, int year,
                                                const Corpus& corpus) {
    return corpus.women_field_share(field, year);
}

// ---------------------------------------------------------------------------
// Ingestion

Corpus ingest_corpus(const IngestPaths& paths, const IngestConfig& cfg) {
    IngestReport report;
    std::vector<PaperRecord> papers;
    for_each_line(paths.papers, cfg, report,
                  [&](std::string_view l) { papers.push_back(parse_paper_line(l)); });
    if (papers.empty()) throw ValidationError("empty corpus");

    std::vector<AuthorRecord> authors;
    if (!paths.authors.empty())
        for_each_line(paths.authors, cfg, report,
                      [&](std::string_view l) { authors.push_back(parse_author_line(l)); });

    std::vector<CitationEdge> citations;
    if (!paths.citations.empty())
        for_each_line(paths.citations, cfg, report,
                      [&](std::string_view l) { citations.push_back(parse_citation_line(l)); });

    std::vector<NameEvidence> names;
    if (!paths.names.empty())
        for_each_line(
            paths.names, cfg, report,
            [&](std::string_view l) { names.push_back(parse_name_line(l)); }, true);

    return Corpus(std::move(papers), std::move(authors), std::move(citations),
                  NameTable(names), cfg, std::move(report));
}

}  // namespace novscope
