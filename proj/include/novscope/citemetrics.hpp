#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "novscope/corpus.hpp"

namespace novscope {

// Simple citation digraph (citing -> cited) with the citing year on every edge.
// Self-citations and duplicate pairs are dropped at construction.
class CitationGraph {
public:
    struct Citer {
        int node;
        int year;
    };

    CitationGraph(const std::vector<CitationEdge>& edges,
                  const std::unordered_map<std::string, int>& paper_years);
    explicit CitationGraph(const Corpus& corpus);

    std::optional<int> node(std::string_view id) const;
    const std::string& id(int node) const { return ids_[static_cast<std::size_t>(node)]; }
    std::size_t num_nodes() const { return ids_.size(); }
    std::size_t num_edges() const { return num_edges_; }

    // Publication year if known (corpus year, else the citing year of its out-edges).
    std::optional<int> year(int node) const;
    // Sorted distinct cited nodes.
    const std::vector<int>& references(int node) const { return refs_[static_cast<std::size_t>(node)]; }
    // Citing nodes sorted by node index.
    const std::vector<Citer>& citers(int node) const { return citers_[static_cast<std::size_t>(node)]; }
    bool cites(int citing, int cited) const;

private:
    int intern(const std::string& id);

    std::vector<std::string> ids_;
    std::unordered_map<std::string, int> index_;
    std::vector<std::optional<int>> years_;
    std::vector<std::vector<int>> refs_;
    std::vector<std::vector<Citer>> citers_;
    std::size_t num_edges_ = 0;
};

struct MetricsConfig {
    int disruption_long_window = 5;
    int disruption_short_window = 3;
    int min_two_step = 5;  // credit requires strictly more two-step citers than this
    int citation_horizon = 2;
};

struct MetricsRow {
    std::string paper_id;
    std::optional<double> disruption_5y;
    std::optional<double> disruption_3y;
    std::optional<double> two_step_credit;
    std::optional<double> outside_subject_share;
    std::int64_t cites_2y = 0;
};

struct DisruptionCounts {
    int n_i = 0;  // cite focal, none of its references
    int n_j = 0;  // cite focal and at least one reference
    int n_k = 0;  // cite a reference but not focal
};

// Counts over papers with citing year <= focal year + window. Papers counted
// in n_k must also be published no earlier than the focal year.
DisruptionCounts disruption_counts(const CitationGraph& graph, std::string_view focal, int window_years);
std::optional<double> disruption(const CitationGraph& graph, std::string_view focal, int window_years);

std::optional<double> two_step_credit(const CitationGraph& graph, std::string_view focal,
                                      int min_two_step = 5);

using SubjectMap = std::unordered_map<std::string, std::vector<std::string>>;

// Fraction of citers with known subjects that share no subject with the focal paper.
std::optional<double> outside_subject_share(const CitationGraph& graph, std::string_view focal,
                                            const SubjectMap& subjects);

std::int64_t forward_citations(const CitationGraph& graph, std::string_view focal, int horizon_years = 2);

// Citations received by the given papers from citing papers dated strictly before `year`.
std::int64_t past_citations(const CitationGraph& graph, const std::vector<std::string>& author_papers,
                            int year);
std::int64_t past_citations(const CitationGraph& graph, const Corpus& corpus,
                            const AuthorRecord& author, int year);

std::vector<MetricsRow> compute_metrics(const Corpus& corpus, const CitationGraph& graph,
                                        const MetricsConfig& cfg = {});

std::string format_metrics_csv(const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> parse_metrics_csv(const std::string& text);

}  // namespace novscope
