#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace novscope {

enum class Gender : std::uint8_t { female, male, unknown };

std::string_view to_string(Gender g);

struct PaperRecord {
    std::string paper_id;
    int year = 0;
    std::string journal_id;
    std::vector<std::string> concept_ids_l3;      // deduplicated, first-seen order
    std::vector<std::string> field_ids_l1;        // deduplicated
    std::vector<std::string> discipline_ids_l0;   // deduplicated
    std::vector<std::string> referenced_journal_ids;  // multiset, as given
    std::vector<std::string> author_ids;
    std::optional<std::string> institution_id;
    bool open_access = false;
    std::optional<double> jif_2y;
    std::optional<double> jif_5y;
    std::optional<int> n_grants;
};

struct AuthorRecord {
    std::string author_id;
    std::optional<std::string> first_name;
    std::optional<std::string> middle_name;
    Gender resolved_gender = Gender::unknown;
    std::optional<int> first_pub_year;
    // Number of corpus papers listing this author; filled at ingest.
    int n_papers = 0;
};

struct NameEvidence {
    std::string name;
    Gender inferred_gender = Gender::unknown;  // female or male
    double probability = 0.0;
    std::int64_t count = 0;
};

struct CitationEdge {
    std::string citing_id;
    std::string cited_id;
    int citing_year = 0;
};

struct IngestConfig {
    // A name is high-confidence iff count > min_name_count OR probability > min_name_probability.
    std::int64_t min_name_count = 100;
    double min_name_probability = 0.90;
    int max_career_age = 60;
    bool department_size_includes_focal = true;
    bool women_share_inclusive_year = true;
    std::optional<int> year_min;
    std::optional<int> year_max;
    double max_malformed_fraction = 0.10;
};

struct IngestPaths {
    std::filesystem::path papers;
    std::filesystem::path authors;
    std::filesystem::path citations;
    std::filesystem::path names;
};

struct IngestReport {
    std::size_t lines_read = 0;
    std::size_t malformed = 0;
    std::size_t duplicates = 0;
    std::size_t self_citations = 0;
    std::size_t out_of_range = 0;
    std::vector<std::string> warnings;
};

// Lowercases ASCII and folds common Latin diacritics (U+00C0..U+017F) to ASCII.
std::string normalize_name(std::string_view name);

// True for names like "J" or "J." which carry no usable gender signal.
bool is_initial(std::string_view name);

class NameTable {
public:
    NameTable() = default;
    explicit NameTable(const std::vector<NameEvidence>& rows);

    const NameEvidence* find(std::string_view name) const;
    std::size_t size() const { return by_name_.size(); }
    const std::vector<NameEvidence>& rows() const { return rows_; }

private:
    std::vector<NameEvidence> rows_;
    std::unordered_map<std::string, std::size_t> by_name_;
};

Gender resolve_gender(const NameEvidence* first, const NameEvidence* middle,
                      const IngestConfig& cfg = {});
Gender resolve_gender(const std::optional<NameEvidence>& first,
                      const std::optional<NameEvidence>& middle, const IngestConfig& cfg = {});

std::optional<int> compute_career_age(const AuthorRecord& author, int focal_year,
                                      const IngestConfig& cfg = {});

struct FemaleShare {
    std::optional<double> share;
    int n_female = 0;
    int n_male = 0;
    int n_unknown = 0;
};

// Immutable indexed corpus. Construction validates, deduplicates, resolves
// author genders and builds the lookup indexes used by the covariate helpers.
class Corpus {
public:
    Corpus(std::vector<PaperRecord> papers, std::vector<AuthorRecord> authors,
           std::vector<CitationEdge> citations, NameTable names, IngestConfig cfg = {},
           IngestReport report = {});

    const std::vector<PaperRecord>& papers() const { return papers_; }
    const std::vector<AuthorRecord>& authors() const { return authors_; }
    const std::vector<CitationEdge>& citations() const { return citations_; }
    const NameTable& names() const { return names_; }
    const IngestConfig& config() const { return cfg_; }
    const IngestReport& report() const { return report_; }

    const PaperRecord* find_paper(std::string_view id) const;
    const AuthorRecord* find_author(std::string_view id) const;
    std::optional<std::size_t> paper_index(std::string_view id) const;

    // Indices of papers the author appears on, in corpus order.
    const std::vector<std::size_t>& papers_of_author(std::string_view author_id) const;

    std::optional<int> department_size(const PaperRecord& paper) const;
    FemaleShare female_share(const PaperRecord& paper) const;
    std::optional<double> women_field_share(std::string_view field, int year) const;

    std::pair<int, int> year_range() const;

private:
    std::vector<PaperRecord> papers_;
    std::vector<AuthorRecord> authors_;
    std::vector<CitationEdge> citations_;
    NameTable names_;
    IngestConfig cfg_;
    IngestReport report_;

    std::unordered_map<std::string, std::size_t> paper_index_;
    std::unordered_map<std::string, std::size_t> author_index_;
    std::unordered_map<std::string, std::vector<std::size_t>> author_papers_;
    // (institution, year, field) -> paper count
    std::map<std::tuple<std::string, int, std::string>, int> dept_counts_;
    // field -> year -> (solo female, solo resolved)
    std::map<std::string, std::map<int, std::pair<int, int>>> solo_by_field_year_;
};

std::optional<int> compute_department_size(const PaperRecord& paper, const Corpus& corpus);
FemaleShare compute_female_share(const PaperRecord& paper, const Corpus& corpus);
std::optional<double> compute_women_field_share(std::string_view field, int year,
                                                const Corpus& corpus);

// Parses line-delimited inputs. Throws ValidationError on unreadable files,
// an empty papers file, or a malformed-line fraction above the configured cap.
Corpus ingest_corpus(const IngestPaths& paths, const IngestConfig& cfg = {});

// Line-level parsers, exposed for tests. Throw ValidationError on schema violations.
PaperRecord parse_paper_line(std::string_view line);
AuthorRecord parse_author_line(std::string_view line);
CitationEdge parse_citation_line(std::string_view line);
NameEvidence parse_name_line(std::string_view line);

// Writers producing the same line formats.
std::string format_paper_line(const PaperRecord& p);
std::string format_author_line(const AuthorRecord& a);
std::string format_citation_line(const CitationEdge& c);
std::string format_name_line(const NameEvidence& n);

}  // namespace novscope
