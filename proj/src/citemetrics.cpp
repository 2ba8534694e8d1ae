#include "novscope/citemetrics.hpp"

#include <algorithm>
#include <set>

#include "novscope/csv.hpp"
#include "novscope/error.hpp"
#include "novscope/io.hpp"

namespace novscope {

namespace {

int require_focal(const CitationGraph& g, std::string_view focal) {
    auto n = g.node(focal);
    if (!n || !g.year(*n)) throw ValidationError("unknown focal paper '" + std::string(focal) + "'");
    return *n;
}

}  // namespace

CitationGraph::CitationGraph(const std::vector<CitationEdge>& edges,
                             const std::unordered_map<std::string, int>& paper_years) {
    std::vector<std::string> sorted_ids;
    sorted_ids.reserve(paper_years.size());
    for (const auto& [id, y] : paper_years) sorted_ids.push_back(id);
    std::sort(sorted_ids.begin(), sorted_ids.end());
    for (const auto& id : sorted_ids) years_[static_cast<std::size_t>(intern(id))] = paper_years.at(id);

    std::set<std::pair<int, int>> seen;
    for (const auto& e : edges) {
        if (e.citing_id == e.cited_id) continue;
        int a = intern(e.citing_id);
        int b = intern(e.cited_id);
        if (!seen.emplace(a, b).second) continue;
        auto& ya = years_[static_cast<std::size_t>(a)];
        if (!ya) ya = e.citing_year;
        refs_[static_cast<std::size_t>(a)].push_back(b);
        citers_[static_cast<std::size_t>(b)].push_back({a, e.citing_year});
        ++num_edges_;
    }
    for (auto& r : refs_) std::sort(r.begin(), r.end());
    for (auto& c : citers_)
        std::sort(c.begin(), c.end(), [](const Citer& x, const Citer& y) { return x.node < y.node; });
}

CitationGraph::CitationGraph(const Corpus& corpus)
    : CitationGraph(corpus.citations(), [&] {
          std::unordered_map<std::string, int> years;
          for (const auto& p : corpus.papers()) years.emplace(p.paper_id, p.year);
          return years;
      }()) {}

int CitationGraph::intern(const std::string& id) {
    auto [it, inserted] = index_.emplace(id, static_cast<int>(ids_.size()));
    if (inserted) {
        ids_.push_back(id);
        years_.emplace_back();
        refs_.emplace_back();
        citers_.emplace_back();
    }
    return it->second;
}

std::optional<int> CitationGraph::node(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::optional<int> CitationGraph::year(int node) const { return years_.at(static_cast<std::size_t>(node)); }

bool CitationGraph::cites(int citing, int cited) const {
    const auto& r = references(citing);
    return std::binary_search(r.begin(), r.end(), cited);
}

DisruptionCounts disruption_counts(const CitationGraph& g, std::string_view focal_id, int window_years) {
    int focal = require_focal(g, focal_id);
    int focal_year = *g.year(focal);
    int upper = focal_year + window_years;
    const auto& refs = g.references(focal);

    DisruptionCounts out;
    std::set<int> cites_focal;
    for (const auto& c : g.citers(focal)) {
        cites_focal.insert(c.node);
        if (c.year < focal_year || c.year > upper) continue;
        bool cites_ref = std::any_of(refs.begin(), refs.end(), [&](int r) { return g.cites(c.node, r); });
        ++(cites_ref ? out.n_j : out.n_i);
    }
    std::set<int> k;
    for (int r : refs)
        for (const auto& c : g.citers(r))
            if (c.node != focal && c.year >= focal_year && c.year <= upper && !cites_focal.contains(c.node))
                k.insert(c.node);
    out.n_k = static_cast<int>(k.size());
    return out;
}

std::optional<double> disruption(const CitationGraph& g, std::string_view focal, int window_years) {
    auto c = disruption_counts(g, focal, window_years);
    int denom = c.n_i + c.n_j + c.n_k;
    if (denom == 0) return std::nullopt;
    return static_cast<double>(c.n_i - c.n_j) / denom;
}

std::optional<double> two_step_credit(const CitationGraph& g, std::string_view focal_id, int min_two_step) {
    int focal = require_focal(g, focal_id);
    std::set<int> two_step;
    for (const auto& l1 : g.citers(focal))
        for (const auto& l2 : g.citers(l1.node))
            if (l2.node != focal) two_step.insert(l2.node);
    if (static_cast<int>(two_step.size()) <= min_two_step) return std::nullopt;
    std::size_t direct = 0;
    for (int p : two_step) direct += g.cites(p, focal) ? 1 : 0;
    return static_cast<double>(direct) / static_cast<double>(two_step.size());
}

std::optional<double> outside_subject_share(const CitationGraph& g, std::string_view focal_id,
                                            const SubjectMap& subjects) {
    int focal = require_focal(g, focal_id);
    auto fit = subjects.find(std::string(focal_id));
    if (fit == subjects.end() || fit->second.empty()) return std::nullopt;
    std::set<std::string> own(fit->second.begin(), fit->second.end());
    int known = 0, outside = 0;
    for (const auto& c : g.citers(focal)) {
        auto it = subjects.find(g.id(c.node));
        if (it == subjects.end() || it->second.empty()) continue;
        ++known;
        bool shares = std::any_of(it->second.begin(), it->second.end(),
                                  [&](const std::string& s) { return own.contains(s); });
        outside += shares ? 0 : 1;
    }
    if (known == 0) return std::nullopt;
    return static_cast<double>(outside) / known;
}

std::int64_t forward_citations(const CitationGraph& g, std::string_view focal_id, int horizon_years) {
    int focal = require_focal(g, focal_id);
    int upper = *g.year(focal) + horizon_years;
    std::int64_t n = 0;
    for (const auto& c : g.citers(focal)) n += c.year <= upper ? 1 : 0;
    return n;
}

std::int64_t past_citations(const CitationGraph& g, const std::vector<std::string>& author_papers, int year) {
    std::int64_t total = 0;
    for (const auto& id : author_papers) {
        auto n = g.node(id);
        if (!n) continue;
        for (const auto& c : g.citers(*n)) total += c.year < year ? 1 : 0;
    }
    return total;
}

std::int64_t past_citations(const CitationGraph& g, const Corpus& corpus, const AuthorRecord& author,
                            int year) {
    std::vector<std::string> ids;
    for (auto i : corpus.papers_of_author(author.author_id)) ids.push_back(corpus.papers()[i].paper_id);
    return past_citations(g, ids, year);
}

std::vector<MetricsRow> compute_metrics(const Corpus& corpus, const CitationGraph& graph,
                                        const MetricsConfig& cfg) {
    SubjectMap subjects;
    for (const auto& p : corpus.papers()) subjects.emplace(p.paper_id, p.field_ids_l1);
    std::vector<MetricsRow> rows;
    rows.reserve(corpus.papers().size());
    for (const auto& p : corpus.papers()) {
        MetricsRow row;
        row.paper_id = p.paper_id;
        if (graph.node(p.paper_id)) {
            row.disruption_5y = disruption(graph, p.paper_id, cfg.disruption_long_window);
            row.disruption_3y = disruption(graph, p.paper_id, cfg.disruption_short_window);
            row.two_step_credit = two_step_credit(graph, p.paper_id, cfg.min_two_step);
            row.outside_subject_share = outside_subject_share(graph, p.paper_id, subjects);
            row.cites_2y = forward_citations(graph, p.paper_id, cfg.citation_horizon);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string format_metrics_csv(const std::vector<MetricsRow>& rows) {
    std::string out = "paper_id,disruption_5y,disruption_3y,two_step_credit,outside_share,cites_2y\n";
    for (const auto& r : rows) {
        out += csv::escape(r.paper_id);
        out += ',' + io::format_optional(r.disruption_5y);
        out += ',' + io::format_optional(r.disruption_3y);
        out += ',' + io::format_optional(r.two_step_credit);
        out += ',' + io::format_optional(r.outside_subject_share);
        out += ',' + std::to_string(r.cites_2y);
        out += '\n';
    }
    return out;
}

std::vector<MetricsRow> parse_metrics_csv(const std::string& text) {
    auto rows = csv::parse(text);
    if (rows.empty() || rows.front() != std::vector<std::string>{"paper_id", "disruption_5y", "disruption_3y",
                                                                  "two_step_credit", "outside_share", "cites_2y"})
        throw ValidationError("metrics.csv has an unexpected header");
    std::vector<MetricsRow> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() != 6) throw ValidationError("metrics.csv row " + std::to_string(i) + " has wrong width");
        MetricsRow m;
        m.paper_id = r[0];
        m.disruption_5y = csv::to_optional_double(r[1]);
        m.disruption_3y = csv::to_optional_double(r[2]);
        m.two_step_credit = csv::to_optional_double(r[3]);
        m.outside_subject_share = csv::to_optional_double(r[4]);
        m.cites_2y = static_cast<std::int64_t>(csv::to_optional_double(r[5]).value_or(0.0));
        out.push_back(std::move(m));
    }
    return out;
}

}  // namespace novscope
